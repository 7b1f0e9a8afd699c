//! Outer BFGS / L-BFGS loop.
//!
//! Per iteration: search direction from the Hessian approximation, line
//! search for the step (delegated to [`crate::linesearch`]), displacement and
//! gradient-change update of the approximation, convergence test
//! `||g|| <= max(eps_abs, eps_rel ||x||)`.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fd::FdScheme;
use crate::linalg::{axpy, dot, norm, sub};
use crate::linesearch::{self, DgMode, LineSearchCfg, LsInput, LsOutcome};
use crate::objective::{BatchWidth, EvalCounters, Evaluator, Objective, Vector};

pub use crate::linesearch::{LsCondition, LsStyle};

/// Dense BFGS (explicit n x n matrix) or limited-memory history of
/// (s, y) pairs applied through the two-loop recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianMode {
    DenseBfgs,
    LimitedMemory,
}

/// Solver configuration.
///
/// `polyfit_order = 0` disables polynomial fitting; `dg_points = 0` (or any
/// value outside {2, 4, 6, 8}) disables the finite-difference directional
/// derivative, falling back to the gradient dot product. `h = None` uses the
/// adaptive default 1e-7 * (1 + ||x||) per line search.
#[derive(Debug, Clone)]
pub struct SolverParams {
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// 0 = unlimited.
    pub max_iterations: usize,
    pub ls_condition: LsCondition,
    pub ls_style: LsStyle,
    pub max_ls_iterations: usize,
    /// L-BFGS history size.
    pub memory: usize,
    pub mode: HessianMode,
    pub c1: f64,
    pub c2: f64,
    /// Batch width W in {1, 4, 8}.
    pub width: usize,
    pub polyfit_order: usize,
    pub dg_points: usize,
    pub h: Option<f64>,
    pub dg_coeffs: Option<Vec<f64>>,
    /// Coupled value+gradient interface, single-point line search only.
    /// Reproduces the unmodified library for baseline comparisons.
    pub legacy_interface: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            eps_abs: 1e-10,
            eps_rel: 1e-6,
            max_iterations: 0,
            ls_condition: LsCondition::Wolfe,
            ls_style: LsStyle::Backtracking,
            max_ls_iterations: 40,
            memory: 6,
            mode: HessianMode::LimitedMemory,
            c1: 1e-4,
            c2: 0.9,
            width: 1,
            polyfit_order: 0,
            dg_points: 4,
            h: None,
            dg_coeffs: None,
            legacy_interface: false,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.eps_abs < 0.0 || self.eps_rel < 0.0 {
            return Err(Error::InvalidParams("tolerances must be >= 0".into()));
        }
        if !(self.c1 > 0.0 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::InvalidParams(format!(
                "need 0 < c1 < c2 < 1, got c1={} c2={}",
                self.c1, self.c2
            )));
        }
        if self.max_ls_iterations < 1 {
            return Err(Error::InvalidParams("max_ls_iterations must be >= 1".into()));
        }
        if self.memory < 1 {
            return Err(Error::InvalidParams("memory must be >= 1".into()));
        }
        BatchWidth::new(self.width)?;
        if self.polyfit_order > 0 && self.polyfit_order > self.width.saturating_sub(1) {
            return Err(Error::InvalidParams(format!(
                "polyfit_order {} exceeds width - 1 = {}",
                self.polyfit_order,
                self.width - 1
            )));
        }
        if let Some(h) = self.h {
            if !(h > 0.0) {
                return Err(Error::InvalidParams(format!("h must be > 0, got {h}")));
            }
        }
        if let (Some(cs), true) = (&self.dg_coeffs, self.fd_enabled()) {
            if cs.len() != self.dg_points {
                return Err(Error::Config(format!(
                    "dg_coeffs length {} does not match dg_points {}",
                    cs.len(),
                    self.dg_points
                )));
            }
        }
        Ok(())
    }

    /// Whether the finite-difference directional derivative is active.
    /// Invalid point counts disable it rather than erroring, matching the
    /// configuration surface this models.
    pub fn fd_enabled(&self) -> bool {
        matches!(self.dg_points, 2 | 4 | 6 | 8) && !self.legacy_interface
    }

    fn fd_scheme(&self, x_norm: f64) -> Result<FdScheme> {
        let h = self.h.unwrap_or_else(|| 1e-7 * (1.0 + x_norm));
        let scheme = FdScheme::new(self.dg_points, h)?;
        match &self.dg_coeffs {
            Some(cs) => scheme.set_coeffs(cs.clone()),
            None => Ok(scheme),
        }
    }
}

/// One (s, y) pair of the limited-memory history.
#[derive(Debug, Clone)]
pub struct HistoryPair {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub rho: f64,
}

/// Relative curvature threshold: pairs with y.s <= 1e-10 ||s|| ||y|| are
/// skipped to preserve positive definiteness.
pub fn curvature_ok(s: &[f64], y: &[f64]) -> bool {
    dot(y, s) > 1e-10 * norm(s) * norm(y)
}

/// Dense BFGS update
/// B' = B + y y^T / y.s - B s s^T B^T / s.B s.
///
/// Returns `None` (update skipped) when the curvature condition fails. The
/// result is explicitly symmetrized to keep roundoff from accumulating.
pub fn bfgs_update(b: &DMatrix<f64>, s: &[f64], y: &[f64]) -> Option<DMatrix<f64>> {
    if !curvature_ok(s, y) {
        return None;
    }
    let n = s.len();
    let sv = nalgebra::DVector::from_column_slice(s);
    let yv = nalgebra::DVector::from_column_slice(y);
    let ys = yv.dot(&sv);
    let bs = b * &sv;
    let sbs = sv.dot(&bs);
    if sbs <= 0.0 {
        return None;
    }
    let mut b_new = b + &yv * yv.transpose() / ys - &bs * bs.transpose() / sbs;
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (b_new[(i, j)] + b_new[(j, i)]);
            b_new[(i, j)] = avg;
            b_new[(j, i)] = avg;
        }
    }
    Some(b_new)
}

/// The Hessian approximation state.
#[derive(Debug, Clone)]
pub enum HessianApprox {
    Dense { b: DMatrix<f64> },
    Limited { pairs: VecDeque<HistoryPair>, memory: usize },
}

impl HessianApprox {
    pub fn new(mode: HessianMode, n: usize, memory: usize) -> Self {
        match mode {
            HessianMode::DenseBfgs => HessianApprox::Dense {
                b: DMatrix::identity(n, n),
            },
            HessianMode::LimitedMemory => HessianApprox::Limited {
                pairs: VecDeque::with_capacity(memory),
                memory,
            },
        }
    }

    /// Search direction p = -B^{-1} g (dense) or the two-loop recursion
    /// result (limited memory). A singular dense matrix resets to the
    /// identity and yields steepest descent.
    pub fn search_direction(&mut self, g: &[f64]) -> Vec<f64> {
        match self {
            HessianApprox::Dense { b } => {
                let rhs = nalgebra::DVector::from_column_slice(g);
                match b.clone().cholesky() {
                    Some(chol) => {
                        let p = chol.solve(&rhs);
                        p.iter().map(|v| -v).collect()
                    }
                    None => {
                        *b = DMatrix::identity(g.len(), g.len());
                        g.iter().map(|v| -v).collect()
                    }
                }
            }
            HessianApprox::Limited { pairs, .. } => two_loop_direction(pairs, g),
        }
    }

    /// Incorporate a displacement / gradient-change pair. Pairs failing the
    /// curvature condition are skipped.
    pub fn update(&mut self, s: Vec<f64>, y: Vec<f64>) {
        match self {
            HessianApprox::Dense { b } => {
                if let Some(b_new) = bfgs_update(b, &s, &y) {
                    *b = b_new;
                }
            }
            HessianApprox::Limited { pairs, memory } => {
                if curvature_ok(&s, &y) {
                    let rho = 1.0 / dot(&y, &s);
                    if pairs.len() == *memory {
                        pairs.pop_front();
                    }
                    pairs.push_back(HistoryPair { s, y, rho });
                }
            }
        }
    }

    fn reset(&mut self, n: usize) {
        match self {
            HessianApprox::Dense { b } => *b = DMatrix::identity(n, n),
            HessianApprox::Limited { pairs, .. } => pairs.clear(),
        }
    }
}

/// Two-loop recursion with initial scaling gamma = s.y / y.y from the most
/// recent pair (1 when the history is empty). Returns -H g.
pub fn two_loop_direction(pairs: &VecDeque<HistoryPair>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for pair in pairs.iter().rev() {
        let a = pair.rho * dot(&pair.s, &q);
        axpy(-a, &pair.y, &mut q);
        alphas.push(a);
    }
    let gamma = match pairs.back() {
        Some(pair) => dot(&pair.s, &pair.y) / dot(&pair.y, &pair.y),
        None => 1.0,
    };
    for qi in q.iter_mut() {
        *qi *= gamma;
    }
    for (pair, &a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = pair.rho * dot(&pair.y, &q);
        axpy(a - b, &pair.s, &mut q);
    }
    q.iter().map(|v| -v).collect()
}

/// Why the run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

/// Per-run result metrics: the columns of the benchmark tables.
#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub iterations: u64,
    pub final_value: f64,
    pub final_grad_norm: f64,
    pub counters: EvalCounters,
    pub wall_time: Duration,
    pub termination: TerminationReason,
}

/// Minimize `objective` from `x0`.
pub fn minimize(
    objective: &dyn Objective,
    x0: &[f64],
    params: &SolverParams,
) -> Result<(Vector, RunMetrics)> {
    minimize_observed(objective, x0, params, &mut |_, _, _| {})
}

/// Like [`minimize`], calling `observer(k, x_k, f_k)` at the starting point
/// and at every accepted iterate.
pub fn minimize_observed(
    objective: &dyn Objective,
    x0: &[f64],
    params: &SolverParams,
    observer: &mut dyn FnMut(u64, &[f64], f64),
) -> Result<(Vector, RunMetrics)> {
    params.validate()?;
    let n = objective.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("x0 has non-finite components".into()));
    }

    let start = Instant::now();
    // Legacy never batches; its trajectory must not depend on the width.
    let width = if params.legacy_interface {
        BatchWidth::new(1).unwrap()
    } else {
        BatchWidth::new(params.width)?
    };
    let mut ev = Evaluator::new(objective, width, params.legacy_interface);

    let (f0, g0) = if params.legacy_interface {
        ev.eval_coupled(x0)?
    } else {
        let f = ev.eval_one(x0)?;
        let g = ev.eval_gradient(x0)?;
        (f, g)
    };
    if !f0.is_finite() {
        return Err(Error::NonFiniteInput(
            "objective is non-finite at the initial point".into(),
        ));
    }

    let mut x = x0.to_vec();
    let mut f = f0;
    let mut g = g0;
    let mut hessian = HessianApprox::new(params.mode, n, params.memory);
    let mut k: u64 = 0;
    observer(0, &x, f);

    let termination = loop {
        let gnorm = norm(&g);
        if gnorm <= params.eps_abs.max(params.eps_rel * norm(&x)) {
            break TerminationReason::Converged;
        }
        if params.max_iterations > 0 && k as usize >= params.max_iterations {
            break TerminationReason::MaxIterations;
        }

        let mut p = hessian.search_direction(&g);
        let mut dg0 = dot(&g, &p);
        if !(dg0 < 0.0) {
            // Not a descent direction (stale curvature); restart from
            // steepest descent.
            hessian.reset(n);
            p = g.iter().map(|v| -v).collect();
            dg0 = -dot(&g, &g);
        }

        let alpha0 = if k == 0 { 1.0 / gnorm } else { 1.0 };
        let dg_mode = if params.fd_enabled() {
            DgMode::Fd(params.fd_scheme(norm(&x))?)
        } else {
            DgMode::GradientDot
        };
        let cfg = LineSearchCfg {
            condition: params.ls_condition,
            style: params.ls_style,
            c1: params.c1,
            c2: params.c2,
            max_iterations: params.max_ls_iterations,
            polyfit_order: if width.get() >= 4 { params.polyfit_order } else { 0 },
            dg: dg_mode,
        };
        let input = LsInput {
            x0: &x,
            p: &p,
            f0: f,
            dg0,
            alpha0,
        };
        let result: Result<LsOutcome> = if width.get() >= 4 {
            linesearch::ls_multipoint(&mut ev, &input, &cfg)
        } else {
            linesearch::ls_single(&mut ev, &input, &cfg)
        };
        let outcome = match result {
            Ok(o) => o,
            Err(Error::LineSearchFailed(_)) => break TerminationReason::LineSearchFailed,
            Err(e) => return Err(e),
        };

        k += 1;
        ev.counters.outer_iterations += 1;

        let g_new = match outcome.g {
            Some(g) => g,
            None => ev.eval_gradient(&outcome.x)?,
        };
        let s = sub(&outcome.x, &x);
        let y = sub(&g_new, &g);
        hessian.update(s, y);

        x = outcome.x;
        f = outcome.f;
        g = g_new;
        observer(k, &x, f);
    };

    let metrics = RunMetrics {
        iterations: k,
        final_value: f,
        final_grad_norm: norm(&g),
        counters: ev.counters,
        wall_time: start.elapsed(),
        termination,
    };
    Ok((Vector::new(x)?, metrics))
}
