//! C ABI for the batchbfgs solver.
//!
//! All types cross the boundary as opaque handles (`BbParams`, `BbProblem`,
//! `BbResult`) created and destroyed by this library; every entry point
//! returns a `BbStatus` code and writes results through out-pointers. The
//! generated header lives at `include/batchbfgs.h`.
//!
//! Thread safety: handles are not synchronized; use one handle per thread
//! or add external locking. `bb_last_error_message` is thread-local.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use batchbfgs::problems::{
    make_curve_problem, make_expectation_problem, RosenbrockProblem,
};
use batchbfgs::solver::{
    minimize, HessianMode, LsCondition, LsStyle, RunMetrics, SolverParams,
    TerminationReason,
};
use batchbfgs::Objective;

/// Status code returned by every API entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbStatus {
    BbOk = 0,
    /// A required pointer argument was null.
    BbNullPointer = 1,
    /// An argument was out of range or inconsistent.
    BbInvalidArgument = 2,
    /// The solver stopped without converging (line-search failure or
    /// iteration limit); partial results are still available.
    BbNotConverged = 3,
    /// Evaluation produced non-finite values or another numerical error.
    BbNumericalError = 4,
    /// A panic was caught at the boundary; the handle state is unspecified.
    BbInternalError = 5,
}

/// Why the solver stopped (mirrors the Rust enum).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbTermination {
    BbConverged = 0,
    BbMaxIterations = 1,
    BbLineSearchFailed = 2,
}

/// Line-search acceptance condition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbCondition {
    BbArmijo = 0,
    BbWolfe = 1,
    BbStrongWolfe = 2,
}

/// Line-search step-control style.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbStyle {
    BbBacktracking = 0,
    BbBracketing = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Message for the most recent error on this thread. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn bb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn guard<F: FnOnce() -> BbStatus>(f: F) -> BbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            BbStatus::BbInternalError
        }
    }
}

// ---------------------------------------------------------------------------
// Parameters

/// Opaque solver-parameter handle.
pub struct BbParams {
    inner: SolverParams,
}

/// Create a parameter handle with library defaults.
#[no_mangle]
pub extern "C" fn bb_params_new() -> *mut BbParams {
    Box::into_raw(Box::new(BbParams {
        inner: SolverParams::default(),
    }))
}

/// Destroy a parameter handle. Null is ignored.
///
/// # Safety
/// `p` must come from `bb_params_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bb_params_free(p: *mut BbParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

macro_rules! with_params {
    ($p:ident, $body:expr) => {{
        if $p.is_null() {
            set_error("null params handle");
            return BbStatus::BbNullPointer;
        }
        let $p = unsafe { &mut *$p };
        guard(|| $body)
    }};
}

/// Set absolute and relative gradient tolerances.
#[no_mangle]
pub extern "C" fn bb_params_set_tolerances(
    p: *mut BbParams,
    eps_abs: f64,
    eps_rel: f64,
) -> BbStatus {
    with_params!(p, {
        if eps_abs < 0.0 || eps_rel < 0.0 {
            set_error("tolerances must be >= 0");
            return BbStatus::BbInvalidArgument;
        }
        p.inner.eps_abs = eps_abs;
        p.inner.eps_rel = eps_rel;
        BbStatus::BbOk
    })
}

/// Set the outer iteration limit; 0 means unlimited.
#[no_mangle]
pub extern "C" fn bb_params_set_max_iterations(p: *mut BbParams, n: u64) -> BbStatus {
    with_params!(p, {
        p.inner.max_iterations = n as usize;
        BbStatus::BbOk
    })
}

/// Set the batch width W; must be 1, 4 or 8.
#[no_mangle]
pub extern "C" fn bb_params_set_width(p: *mut BbParams, width: u32) -> BbStatus {
    with_params!(p, {
        if !matches!(width, 1 | 4 | 8) {
            set_error("width must be 1, 4 or 8");
            return BbStatus::BbInvalidArgument;
        }
        p.inner.width = width as usize;
        BbStatus::BbOk
    })
}

/// Set the polynomial fit order; 0 disables fitting. Must be < width.
#[no_mangle]
pub extern "C" fn bb_params_set_polyfit_order(p: *mut BbParams, order: u32) -> BbStatus {
    with_params!(p, {
        p.inner.polyfit_order = order as usize;
        BbStatus::BbOk
    })
}

/// Set the finite-difference stencil size for line-search directional
/// derivatives; one of 0 (disable), 2, 4, 6, 8.
#[no_mangle]
pub extern "C" fn bb_params_set_dg_points(p: *mut BbParams, points: u32) -> BbStatus {
    with_params!(p, {
        if !matches!(points, 0 | 2 | 4 | 6 | 8) {
            set_error("dg_points must be one of 0, 2, 4, 6, 8");
            return BbStatus::BbInvalidArgument;
        }
        p.inner.dg_points = points as usize;
        BbStatus::BbOk
    })
}

/// Set the finite-difference step size; pass 0 or negative to restore the
/// adaptive default 1e-7 * (1 + ||x||).
#[no_mangle]
pub extern "C" fn bb_params_set_h(p: *mut BbParams, h: f64) -> BbStatus {
    with_params!(p, {
        p.inner.h = if h > 0.0 { Some(h) } else { None };
        BbStatus::BbOk
    })
}

/// Replace the finite-difference coefficients; `len` must equal the
/// configured dg_points.
///
/// # Safety
/// `coeffs` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn bb_params_set_dg_coeffs(
    p: *mut BbParams,
    coeffs: *const f64,
    len: usize,
) -> BbStatus {
    if coeffs.is_null() && len > 0 {
        set_error("null coeffs pointer");
        return BbStatus::BbNullPointer;
    }
    let slice = if len == 0 {
        &[][..]
    } else {
        std::slice::from_raw_parts(coeffs, len)
    };
    let owned = slice.to_vec();
    with_params!(p, {
        p.inner.dg_coeffs = if owned.is_empty() { None } else { Some(owned) };
        BbStatus::BbOk
    })
}

/// Select the line-search condition and style.
#[no_mangle]
pub extern "C" fn bb_params_set_linesearch(
    p: *mut BbParams,
    condition: BbCondition,
    style: BbStyle,
) -> BbStatus {
    with_params!(p, {
        p.inner.ls_condition = match condition {
            BbCondition::BbArmijo => LsCondition::Armijo,
            BbCondition::BbWolfe => LsCondition::Wolfe,
            BbCondition::BbStrongWolfe => LsCondition::StrongWolfe,
        };
        p.inner.ls_style = match style {
            BbStyle::BbBacktracking => LsStyle::Backtracking,
            BbStyle::BbBracketing => LsStyle::Bracketing,
        };
        BbStatus::BbOk
    })
}

/// Set the sufficient-decrease and curvature constants (0 < c1 < c2 < 1).
#[no_mangle]
pub extern "C" fn bb_params_set_wolfe_constants(
    p: *mut BbParams,
    c1: f64,
    c2: f64,
) -> BbStatus {
    with_params!(p, {
        if !(c1 > 0.0 && c1 < c2 && c2 < 1.0) {
            set_error("need 0 < c1 < c2 < 1");
            return BbStatus::BbInvalidArgument;
        }
        p.inner.c1 = c1;
        p.inner.c2 = c2;
        BbStatus::BbOk
    })
}

/// Set the limited-memory history length (>= 1).
#[no_mangle]
pub extern "C" fn bb_params_set_memory(p: *mut BbParams, m: u32) -> BbStatus {
    with_params!(p, {
        if m == 0 {
            set_error("memory must be >= 1");
            return BbStatus::BbInvalidArgument;
        }
        p.inner.memory = m as usize;
        BbStatus::BbOk
    })
}

/// Toggle the dense BFGS matrix (true) vs the limited-memory recursion.
#[no_mangle]
pub extern "C" fn bb_params_set_dense(p: *mut BbParams, dense: bool) -> BbStatus {
    with_params!(p, {
        p.inner.mode = if dense {
            HessianMode::DenseBfgs
        } else {
            HessianMode::LimitedMemory
        };
        BbStatus::BbOk
    })
}

/// Toggle the coupled value+gradient (legacy) evaluation interface.
#[no_mangle]
pub extern "C" fn bb_params_set_legacy_interface(
    p: *mut BbParams,
    legacy: bool,
) -> BbStatus {
    with_params!(p, {
        p.inner.legacy_interface = legacy;
        BbStatus::BbOk
    })
}

// ---------------------------------------------------------------------------
// Problems

/// Value callback: objective at `x` (length `n`), with the registered
/// user pointer.
pub type BbValueFn =
    unsafe extern "C" fn(n: usize, x: *const f64, user: *mut c_void) -> f64;

/// Gradient callback: writes `n` components to `grad`.
pub type BbGradientFn =
    unsafe extern "C" fn(n: usize, x: *const f64, grad: *mut f64, user: *mut c_void);

struct CallbackObjective {
    n: usize,
    value_fn: BbValueFn,
    gradient_fn: BbGradientFn,
    user: *mut c_void,
}

impl Objective for CallbackObjective {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        unsafe { (self.value_fn)(self.n, x.as_ptr(), self.user) }
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        unsafe { (self.gradient_fn)(self.n, x.as_ptr(), g.as_mut_ptr(), self.user) };
        g
    }
}

/// Opaque problem handle: an objective plus its default starting point.
pub struct BbProblem {
    objective: Box<dyn Objective>,
    x0: Vec<f64>,
}

/// Synthetic curve-calibration problem (n = 33) seeded deterministically.
#[no_mangle]
pub extern "C" fn bb_problem_curve(seed: u64) -> *mut BbProblem {
    let p = make_curve_problem(seed);
    let x0 = p.x0().to_vec();
    Box::into_raw(Box::new(BbProblem {
        objective: Box::new(p),
        x0,
    }))
}

/// Monte-Carlo expectation-loss problem; returns null if `paths` < 100 or a
/// dimension is 0.
#[no_mangle]
pub extern "C" fn bb_problem_expectation(
    seed: u64,
    n: usize,
    terms: usize,
    paths: usize,
) -> *mut BbProblem {
    match make_expectation_problem(seed, n, terms, paths) {
        Ok(p) => {
            let x0 = p.x0().to_vec();
            Box::into_raw(Box::new(BbProblem {
                objective: Box::new(p),
                x0,
            }))
        }
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Chained Rosenbrock; `n` must be even and >= 2, otherwise returns null.
#[no_mangle]
pub extern "C" fn bb_problem_rosenbrock(n: usize) -> *mut BbProblem {
    match RosenbrockProblem::new(n) {
        Ok(p) => {
            let x0 = p.x0();
            Box::into_raw(Box::new(BbProblem {
                objective: Box::new(p),
                x0,
            }))
        }
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// User-defined objective through C callbacks. `x0` supplies the starting
/// point (`n` doubles). The callbacks and `user` must stay valid for the
/// life of the handle.
///
/// # Safety
/// `x0` must point to `n` readable doubles; the callbacks must be safe to
/// call with any finite `x` of length `n`.
#[no_mangle]
pub unsafe extern "C" fn bb_problem_custom(
    n: usize,
    value_fn: Option<BbValueFn>,
    gradient_fn: Option<BbGradientFn>,
    user: *mut c_void,
    x0: *const f64,
) -> *mut BbProblem {
    let (Some(value_fn), Some(gradient_fn)) = (value_fn, gradient_fn) else {
        set_error("null objective callback");
        return ptr::null_mut();
    };
    if n == 0 || x0.is_null() {
        set_error("custom problem needs n >= 1 and a starting point");
        return ptr::null_mut();
    }
    let x0 = std::slice::from_raw_parts(x0, n).to_vec();
    Box::into_raw(Box::new(BbProblem {
        objective: Box::new(CallbackObjective {
            n,
            value_fn,
            gradient_fn,
            user,
        }),
        x0,
    }))
}

/// Problem dimension, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn bb_problem_dim(p: *const BbProblem) -> usize {
    if p.is_null() {
        return 0;
    }
    unsafe { (*p).objective.dim() }
}

/// Copy the default starting point into `out` (`bb_problem_dim` doubles).
///
/// # Safety
/// `out` must point to `bb_problem_dim(p)` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bb_problem_x0(p: *const BbProblem, out: *mut f64) -> BbStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer");
        return BbStatus::BbNullPointer;
    }
    let p = &*p;
    std::ptr::copy_nonoverlapping(p.x0.as_ptr(), out, p.x0.len());
    BbStatus::BbOk
}

/// Destroy a problem handle. Null is ignored.
///
/// # Safety
/// `p` must come from a `bb_problem_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bb_problem_free(p: *mut BbProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// ---------------------------------------------------------------------------
// Running and results

/// Opaque result handle: final iterate plus run metrics.
pub struct BbResult {
    x: Vec<f64>,
    metrics: RunMetrics,
}

/// Minimize `problem` with `params`, starting from `x0` (length
/// `bb_problem_dim`) or from the problem's default start when `x0` is null.
/// On success writes a result handle to `out`; the handle is also written
/// when the run stops without converging (status `BbNotConverged`).
///
/// # Safety
/// `x0`, when non-null, must point to `bb_problem_dim(problem)` readable
/// doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bb_minimize(
    problem: *const BbProblem,
    x0: *const f64,
    params: *const BbParams,
    out: *mut *mut BbResult,
) -> BbStatus {
    if problem.is_null() || params.is_null() || out.is_null() {
        set_error("null pointer");
        return BbStatus::BbNullPointer;
    }
    *out = ptr::null_mut();
    let problem = &*problem;
    let params = &*params;
    let start: Vec<f64> = if x0.is_null() {
        problem.x0.clone()
    } else {
        std::slice::from_raw_parts(x0, problem.objective.dim()).to_vec()
    };

    guard(|| match minimize(problem.objective.as_ref(), &start, &params.inner) {
        Ok((x, metrics)) => {
            let status = match metrics.termination {
                TerminationReason::Converged => BbStatus::BbOk,
                _ => {
                    set_error("solver stopped without converging");
                    BbStatus::BbNotConverged
                }
            };
            *out = Box::into_raw(Box::new(BbResult {
                x: x.into_inner(),
                metrics,
            }));
            status
        }
        Err(e) => {
            set_error(&e.to_string());
            match e {
                batchbfgs::Error::Numerical(_) | batchbfgs::Error::NonFiniteInput(_) => {
                    BbStatus::BbNumericalError
                }
                _ => BbStatus::BbInvalidArgument,
            }
        }
    })
}

/// Copy the solution into `out` (`len` doubles; must equal the dimension).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bb_result_solution(
    r: *const BbResult,
    out: *mut f64,
    len: usize,
) -> BbStatus {
    if r.is_null() || out.is_null() {
        set_error("null pointer");
        return BbStatus::BbNullPointer;
    }
    let r = &*r;
    if len != r.x.len() {
        set_error("solution buffer length mismatch");
        return BbStatus::BbInvalidArgument;
    }
    std::ptr::copy_nonoverlapping(r.x.as_ptr(), out, len);
    BbStatus::BbOk
}

/// Final objective value.
#[no_mangle]
pub extern "C" fn bb_result_value(r: *const BbResult) -> f64 {
    if r.is_null() {
        return f64::NAN;
    }
    unsafe { (*r).metrics.final_value }
}

/// Final gradient norm.
#[no_mangle]
pub extern "C" fn bb_result_grad_norm(r: *const BbResult) -> f64 {
    if r.is_null() {
        return f64::NAN;
    }
    unsafe { (*r).metrics.final_grad_norm }
}

/// Outer iteration count.
#[no_mangle]
pub extern "C" fn bb_result_iterations(r: *const BbResult) -> u64 {
    if r.is_null() {
        return 0;
    }
    unsafe { (*r).metrics.iterations }
}

/// Batched forward (value) call count.
#[no_mangle]
pub extern "C" fn bb_result_forward_calls(r: *const BbResult) -> u64 {
    if r.is_null() {
        return 0;
    }
    unsafe { (*r).metrics.counters.forward_calls }
}

/// Reverse (gradient) call count.
#[no_mangle]
pub extern "C" fn bb_result_reverse_calls(r: *const BbResult) -> u64 {
    if r.is_null() {
        return 0;
    }
    unsafe { (*r).metrics.counters.reverse_calls }
}

/// Total line-search iterations across the run.
#[no_mangle]
pub extern "C" fn bb_result_ls_iterations(r: *const BbResult) -> u64 {
    if r.is_null() {
        return 0;
    }
    unsafe { (*r).metrics.counters.ls_iterations }
}

/// Why the run stopped.
#[no_mangle]
pub extern "C" fn bb_result_termination(r: *const BbResult) -> BbTermination {
    if r.is_null() {
        return BbTermination::BbLineSearchFailed;
    }
    match unsafe { (*r).metrics.termination } {
        TerminationReason::Converged => BbTermination::BbConverged,
        TerminationReason::MaxIterations => BbTermination::BbMaxIterations,
        TerminationReason::LineSearchFailed => BbTermination::BbLineSearchFailed,
    }
}

/// Destroy a result handle. Null is ignored.
///
/// # Safety
/// `r` must come from `bb_minimize` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bb_result_free(r: *mut BbResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
