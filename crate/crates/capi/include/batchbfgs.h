#ifndef BATCHBFGS_H
#define BATCHBFGS_H

/* Generated by cbindgen from crates/capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every API entry point.
 */
typedef enum BbStatus {
  BbOk = 0,
  /**
   * A required pointer argument was null.
   */
  BbNullPointer = 1,
  /**
   * An argument was out of range or inconsistent.
   */
  BbInvalidArgument = 2,
  /**
   * The solver stopped without converging (line-search failure or
   * iteration limit); partial results are still available.
   */
  BbNotConverged = 3,
  /**
   * Evaluation produced non-finite values or another numerical error.
   */
  BbNumericalError = 4,
  /**
   * A panic was caught at the boundary; the handle state is unspecified.
   */
  BbInternalError = 5,
} BbStatus;

/**
 * Line-search acceptance condition.
 */
typedef enum BbCondition {
  BbArmijo = 0,
  BbWolfe = 1,
  BbStrongWolfe = 2,
} BbCondition;

/**
 * Line-search step-control style.
 */
typedef enum BbStyle {
  BbBacktracking = 0,
  BbBracketing = 1,
} BbStyle;

/**
 * Why the solver stopped (mirrors the Rust enum).
 */
typedef enum BbTermination {
  BbConverged = 0,
  BbMaxIterations = 1,
  BbLineSearchFailed = 2,
} BbTermination;

/**
 * Opaque solver-parameter handle.
 */
typedef struct BbParams BbParams;

/**
 * Opaque problem handle: an objective plus its default starting point.
 */
typedef struct BbProblem BbProblem;

/**
 * Opaque result handle: final iterate plus run metrics.
 */
typedef struct BbResult BbResult;

typedef struct Option_BbGradientFn Option_BbGradientFn;

typedef struct Option_BbValueFn Option_BbValueFn;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. Valid until the next
 * failing call on the same thread; do not free.
 */
const char *bb_last_error_message(void);

/**
 * Create a parameter handle with library defaults.
 */
struct BbParams *bb_params_new(void);

/**
 * Destroy a parameter handle. Null is ignored.
 *
 * # Safety
 * `p` must come from `bb_params_new` and not be used afterwards.
 */
void bb_params_free(struct BbParams *p);

/**
 * Set absolute and relative gradient tolerances.
 */
enum BbStatus bb_params_set_tolerances(struct BbParams *p, double eps_abs, double eps_rel);

/**
 * Set the outer iteration limit; 0 means unlimited.
 */
enum BbStatus bb_params_set_max_iterations(struct BbParams *p, uint64_t n);

/**
 * Set the batch width W; must be 1, 4 or 8.
 */
enum BbStatus bb_params_set_width(struct BbParams *p, uint32_t width);

/**
 * Set the polynomial fit order; 0 disables fitting. Must be < width.
 */
enum BbStatus bb_params_set_polyfit_order(struct BbParams *p, uint32_t order);

/**
 * Set the finite-difference stencil size for line-search directional
 * derivatives; one of 0 (disable), 2, 4, 6, 8.
 */
enum BbStatus bb_params_set_dg_points(struct BbParams *p, uint32_t points);

/**
 * Set the finite-difference step size; pass 0 or negative to restore the
 * adaptive default 1e-7 * (1 + ||x||).
 */
enum BbStatus bb_params_set_h(struct BbParams *p, double h);

/**
 * Replace the finite-difference coefficients; `len` must equal the
 * configured dg_points.
 *
 * # Safety
 * `coeffs` must point to `len` readable doubles.
 */
enum BbStatus bb_params_set_dg_coeffs(struct BbParams *p, const double *coeffs, uintptr_t len);

/**
 * Select the line-search condition and style.
 */
enum BbStatus bb_params_set_linesearch(struct BbParams *p,
                                       enum BbCondition condition,
                                       enum BbStyle style);

/**
 * Set the sufficient-decrease and curvature constants (0 < c1 < c2 < 1).
 */
enum BbStatus bb_params_set_wolfe_constants(struct BbParams *p, double c1, double c2);

/**
 * Set the limited-memory history length (>= 1).
 */
enum BbStatus bb_params_set_memory(struct BbParams *p, uint32_t m);

/**
 * Toggle the dense BFGS matrix (true) vs the limited-memory recursion.
 */
enum BbStatus bb_params_set_dense(struct BbParams *p, bool dense);

/**
 * Toggle the coupled value+gradient (legacy) evaluation interface.
 */
enum BbStatus bb_params_set_legacy_interface(struct BbParams *p, bool legacy);

/**
 * Synthetic curve-calibration problem (n = 33) seeded deterministically.
 */
struct BbProblem *bb_problem_curve(uint64_t seed);

/**
 * Monte-Carlo expectation-loss problem; returns null if `paths` < 100 or a
 * dimension is 0.
 */
struct BbProblem *bb_problem_expectation(uint64_t seed,
                                         uintptr_t n,
                                         uintptr_t terms,
                                         uintptr_t paths);

/**
 * Chained Rosenbrock; `n` must be even and >= 2, otherwise returns null.
 */
struct BbProblem *bb_problem_rosenbrock(uintptr_t n);

/**
 * User-defined objective through C callbacks. `x0` supplies the starting
 * point (`n` doubles). The callbacks and `user` must stay valid for the
 * life of the handle.
 *
 * # Safety
 * `x0` must point to `n` readable doubles; the callbacks must be safe to
 * call with any finite `x` of length `n`.
 */
struct BbProblem *bb_problem_custom(uintptr_t n,
                                    struct Option_BbValueFn value_fn,
                                    struct Option_BbGradientFn gradient_fn,
                                    void *user,
                                    const double *x0);

/**
 * Problem dimension, or 0 for a null handle.
 */
uintptr_t bb_problem_dim(const struct BbProblem *p);

/**
 * Copy the default starting point into `out` (`bb_problem_dim` doubles).
 *
 * # Safety
 * `out` must point to `bb_problem_dim(p)` writable doubles.
 */
enum BbStatus bb_problem_x0(const struct BbProblem *p, double *out);

/**
 * Destroy a problem handle. Null is ignored.
 *
 * # Safety
 * `p` must come from a `bb_problem_*` constructor and not be used afterwards.
 */
void bb_problem_free(struct BbProblem *p);

/**
 * Minimize `problem` with `params`, starting from `x0` (length
 * `bb_problem_dim`) or from the problem's default start when `x0` is null.
 * On success writes a result handle to `out`; the handle is also written
 * when the run stops without converging (status `BbNotConverged`).
 *
 * # Safety
 * `x0`, when non-null, must point to `bb_problem_dim(problem)` readable
 * doubles; `out` must be a valid pointer.
 */
enum BbStatus bb_minimize(const struct BbProblem *problem,
                          const double *x0,
                          const struct BbParams *params,
                          struct BbResult **out);

/**
 * Copy the solution into `out` (`len` doubles; must equal the dimension).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum BbStatus bb_result_solution(const struct BbResult *r, double *out, uintptr_t len);

/**
 * Final objective value.
 */
double bb_result_value(const struct BbResult *r);

/**
 * Final gradient norm.
 */
double bb_result_grad_norm(const struct BbResult *r);

/**
 * Outer iteration count.
 */
uint64_t bb_result_iterations(const struct BbResult *r);

/**
 * Batched forward (value) call count.
 */
uint64_t bb_result_forward_calls(const struct BbResult *r);

/**
 * Reverse (gradient) call count.
 */
uint64_t bb_result_reverse_calls(const struct BbResult *r);

/**
 * Total line-search iterations across the run.
 */
uint64_t bb_result_ls_iterations(const struct BbResult *r);

/**
 * Why the run stopped.
 */
enum BbTermination bb_result_termination(const struct BbResult *r);

/**
 * Destroy a result handle. Null is ignored.
 *
 * # Safety
 * `r` must come from `bb_minimize` and not be used afterwards.
 */
void bb_result_free(struct BbResult *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BATCHBFGS_H */
