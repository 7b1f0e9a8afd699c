//! Step-length selection along a descent direction.
//!
//! Three families:
//! - [`ls_single`]: the classical one-point-per-evaluation search
//!   (backtracking or bracket/zoom), used for the scalar baseline and for
//!   the legacy coupled interface.
//! - [`ls_multipoint`]: evaluates the whole candidate grid in one batched
//!   forward call per line-search iteration and takes the argmin lane.
//! - Polynomial fitting on top of the multipoint batch: fit the sampled
//!   (step, value) pairs, jump to the fitted minimizer when it lies in
//!   [alpha/4, 4 alpha] and actually decreases f, otherwise fall back to
//!   the argmin lane.

use crate::error::{Error, Result};
use crate::fd::{self, FdScheme};
use crate::linalg::{add_scaled, dot};
use crate::objective::Evaluator;
use crate::polyfit;

/// Line search termination condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsCondition {
    Armijo,
    Wolfe,
    StrongWolfe,
}

/// How the trial step evolves when the condition is not met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStyle {
    Backtracking,
    Bracketing,
}

/// Source of directional derivatives at trial points.
#[derive(Debug, Clone)]
pub enum DgMode {
    /// Central finite differences along the direction; forward calls only.
    Fd(FdScheme),
    /// Full gradient at the trial point, dotted with the direction. This is
    /// what the unmodified interface does; it costs a reverse call per check.
    GradientDot,
}

/// Line-search configuration distilled from the solver parameters.
#[derive(Debug, Clone)]
pub struct LineSearchCfg {
    pub condition: LsCondition,
    pub style: LsStyle,
    pub c1: f64,
    pub c2: f64,
    pub max_iterations: usize,
    /// 0 disables polynomial fitting.
    pub polyfit_order: usize,
    pub dg: DgMode,
}

/// State at line-search entry: origin, direction, and values there.
pub struct LsInput<'a> {
    pub x0: &'a [f64],
    pub p: &'a [f64],
    pub f0: f64,
    /// Directional derivative at the origin, g_k . p_k; must be negative.
    pub dg0: f64,
    pub alpha0: f64,
}

/// Accepted step. `g` is the gradient at `x` when the search already
/// computed it (coupled interface or gradient-dot curvature checks), so the
/// solver can reuse it instead of issuing another reverse call.
#[derive(Debug, Clone)]
pub struct LsOutcome {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Option<Vec<f64>>,
}

/// Termination condition predicate.
///
/// Armijo: f_alpha <= f0 + c1 alpha dg0 (no derivative at the trial point).
/// Wolfe adds dg_alpha >= c2 dg0; strong Wolfe |dg_alpha| <= c2 |dg0|.
pub fn check_condition(
    cond: LsCondition,
    f0: f64,
    dg0: f64,
    f_alpha: f64,
    dg_alpha: f64,
    alpha: f64,
    c1: f64,
    c2: f64,
) -> bool {
    let armijo = f_alpha <= f0 + c1 * alpha * dg0;
    match cond {
        LsCondition::Armijo => armijo,
        LsCondition::Wolfe => armijo && dg_alpha >= c2 * dg0,
        LsCondition::StrongWolfe => armijo && dg_alpha.abs() <= c2 * dg0.abs(),
    }
}

/// Step multipliers of the batched candidate grid.
pub fn candidate_multipliers(width: usize) -> Result<&'static [f64]> {
    match width {
        4 => Ok(&[0.5, 1.0, 1.5, 2.0]),
        8 => Ok(&[0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]),
        _ => Err(Error::InvalidParams(format!(
            "multipoint grid needs width 4 or 8, got {width}"
        ))),
    }
}

/// Candidate (step, point) pairs `x_prev + m alpha p` for the grid
/// multipliers `m`, in multiplier order.
pub fn candidate_steps(
    x_prev: &[f64],
    p: &[f64],
    alpha: f64,
    width: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let mults = candidate_multipliers(width)?;
    Ok(mults
        .iter()
        .map(|m| {
            let step = m * alpha;
            (step, add_scaled(x_prev, step, p))
        })
        .collect())
}

/// Directional derivative at a trial point, per the configured mode.
/// `Ok(None)` means the evaluation hit a non-finite value and the caller
/// should treat the condition as failed.
#[allow(clippy::type_complexity)]
fn dg_at(
    ev: &mut Evaluator,
    cfg: &LineSearchCfg,
    x: &[f64],
    p: &[f64],
) -> Result<Option<(f64, Option<Vec<f64>>)>> {
    match &cfg.dg {
        DgMode::Fd(scheme) => match fd::directional_derivative(ev, x, p, scheme) {
            Ok(dg) => Ok(Some((dg, None))),
            Err(Error::Numerical(_)) => Ok(None),
            Err(e) => Err(e),
        },
        DgMode::GradientDot => match ev.eval_gradient(x) {
            Ok(g) => {
                let dg = dot(&g, p);
                Ok(Some((dg, Some(g))))
            }
            Err(Error::Numerical(_)) => Ok(None),
            Err(e) => Err(e),
        },
    }
}

/// Evaluate one trial point, honoring the legacy coupled interface.
fn eval_trial(ev: &mut Evaluator, x: &[f64]) -> Result<(f64, Option<Vec<f64>>)> {
    if ev.legacy() {
        match ev.eval_coupled(x) {
            Ok((f, g)) => Ok((f, Some(g))),
            Err(Error::Numerical(_)) => Ok((f64::INFINITY, None)),
            Err(e) => Err(e),
        }
    } else {
        Ok((ev.eval_one(x)?, None))
    }
}

/// Test the configured condition at a trial point whose value is known.
/// Returns the outcome when accepted.
fn try_accept(
    ev: &mut Evaluator,
    cfg: &LineSearchCfg,
    input: &LsInput,
    alpha: f64,
    x: Vec<f64>,
    f: f64,
    g: Option<Vec<f64>>,
) -> Result<std::result::Result<LsOutcome, (Vec<f64>, f64, f64)>> {
    if !f.is_finite() {
        return Ok(Err((x, f, f64::NAN)));
    }
    // Armijo first; it needs no derivative at the trial point.
    let armijo = f <= input.f0 + cfg.c1 * alpha * input.dg0;
    if !armijo {
        return Ok(Err((x, f, f64::NAN)));
    }
    if cfg.condition == LsCondition::Armijo {
        return Ok(Ok(LsOutcome { alpha, x, f, g }));
    }
    let (dg, g_new) = if let Some(g) = &g {
        (dot(g, input.p), None)
    } else {
        match dg_at(ev, cfg, &x, input.p)? {
            Some(v) => v,
            None => return Ok(Err((x, f, f64::NAN))),
        }
    };
    let g = g.or(g_new);
    if check_condition(
        cfg.condition,
        input.f0,
        input.dg0,
        f,
        dg,
        alpha,
        cfg.c1,
        cfg.c2,
    ) {
        Ok(Ok(LsOutcome { alpha, x, f, g }))
    } else {
        Ok(Err((x, f, dg)))
    }
}

/// Single-point line search (scalar baseline / legacy interface).
pub fn ls_single(ev: &mut Evaluator, input: &LsInput, cfg: &LineSearchCfg) -> Result<LsOutcome> {
    debug_assert!(input.dg0 < 0.0, "descent direction required");
    match cfg.style {
        LsStyle::Backtracking => ls_single_backtracking(ev, input, cfg),
        LsStyle::Bracketing => ls_single_bracketing(ev, input, cfg),
    }
}

fn ls_single_backtracking(
    ev: &mut Evaluator,
    input: &LsInput,
    cfg: &LineSearchCfg,
) -> Result<LsOutcome> {
    let mut alpha = input.alpha0;
    for _ in 0..cfg.max_iterations {
        ev.counters.ls_iterations += 1;
        let x = add_scaled(input.x0, alpha, input.p);
        let (f, g) = eval_trial(ev, &x)?;
        match try_accept(ev, cfg, input, alpha, x, f, g)? {
            Ok(out) => return Ok(out),
            // A finite trial slope means Armijo held and only the curvature
            // condition failed; a still-negative slope says the step is too
            // short, so expand instead of shrinking (halving would never
            // satisfy curvature).
            Err((_, _, dg)) if dg.is_finite() && dg < 0.0 => alpha *= 2.0,
            Err(_) => alpha *= 0.5,
        }
    }
    Err(Error::LineSearchFailed(cfg.max_iterations))
}

fn ls_single_bracketing(
    ev: &mut Evaluator,
    input: &LsInput,
    cfg: &LineSearchCfg,
) -> Result<LsOutcome> {
    let mut budget = cfg.max_iterations;
    let mut alpha_prev = 0.0f64;
    let mut f_prev = input.f0;
    let mut g_prev: Option<Vec<f64>> = None;
    let mut x_prev: Option<Vec<f64>> = None;
    let mut alpha = input.alpha0;

    // Bracketing stage: grow alpha until the minimum is straddled.
    while budget > 0 {
        budget -= 1;
        ev.counters.ls_iterations += 1;
        let x = add_scaled(input.x0, alpha, input.p);
        let (f, g) = eval_trial(ev, &x)?;

        let armijo_fail = !f.is_finite() || f > input.f0 + cfg.c1 * alpha * input.dg0;
        if armijo_fail || (alpha_prev > 0.0 && f >= f_prev) {
            return zoom(
                ev, input, cfg, alpha_prev, f_prev, alpha, &mut budget,
                x_prev, g_prev,
            );
        }
        match try_accept(ev, cfg, input, alpha, x.clone(), f, g.clone())? {
            Ok(out) => return Ok(out),
            Err((_, _, dg)) => {
                if dg.is_nan() || dg >= 0.0 {
                    // Minimum is behind us; shrink toward alpha_prev.
                    return zoom(
                        ev, input, cfg, alpha, f, alpha_prev, &mut budget,
                        Some(x.clone()), g.clone(),
                    );
                }
                alpha_prev = alpha;
                f_prev = f;
                g_prev = g;
                x_prev = Some(x);
                alpha *= 2.0;
            }
        }
    }
    Err(Error::LineSearchFailed(cfg.max_iterations))
}

/// Bisection zoom on [lo, hi] (lo is the endpoint with the lower f seen so
/// far; the interval need not be ordered).
#[allow(clippy::too_many_arguments)]
fn zoom(
    ev: &mut Evaluator,
    input: &LsInput,
    cfg: &LineSearchCfg,
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    budget: &mut usize,
    mut x_lo: Option<Vec<f64>>,
    mut g_lo: Option<Vec<f64>>,
) -> Result<LsOutcome> {
    while *budget > 0 {
        *budget -= 1;
        let alpha = 0.5 * (lo + hi);
        ev.counters.ls_iterations += 1;
        let x = add_scaled(input.x0, alpha, input.p);
        let (f, g) = eval_trial(ev, &x)?;

        let armijo_fail = !f.is_finite() || f > input.f0 + cfg.c1 * alpha * input.dg0;
        if armijo_fail || f >= f_lo {
            hi = alpha;
        } else {
            match try_accept(ev, cfg, input, alpha, x.clone(), f, g.clone())? {
                Ok(out) => return Ok(out),
                Err((_, _, dg)) => {
                    if !dg.is_nan() && dg * (hi - lo) >= 0.0 {
                        hi = lo;
                    }
                    lo = alpha;
                    f_lo = f;
                    x_lo = Some(x);
                    g_lo = g;
                }
            }
        }
        if (hi - lo).abs() <= 1e-14 * (1.0 + lo.abs()) {
            break;
        }
    }
    // Interval collapsed or budget spent. Accept the low point when it has
    // sufficient decrease; otherwise the search failed.
    if lo > 0.0 && f_lo <= input.f0 + cfg.c1 * lo * input.dg0 {
        let x = x_lo.unwrap_or_else(|| add_scaled(input.x0, lo, input.p));
        return Ok(LsOutcome {
            alpha: lo,
            x,
            f: f_lo,
            g: g_lo,
        });
    }
    Err(Error::LineSearchFailed(cfg.max_iterations))
}

/// Batched multipoint line search (with optional polynomial fitting).
///
/// One forward batch per line-search iteration over the candidate grid; the
/// argmin lane (ties broken toward the smallest multiplier) is the trial
/// point. With `polyfit_order >= 1` the sampled values are fitted and the
/// fitted minimizer replaces the argmin lane when it is acceptable and
/// decreases f.
pub fn ls_multipoint(ev: &mut Evaluator, input: &LsInput, cfg: &LineSearchCfg) -> Result<LsOutcome> {
    debug_assert!(input.dg0 < 0.0, "descent direction required");
    let width = ev.width();
    let mut alpha = input.alpha0;

    for _ in 0..cfg.max_iterations {
        let candidates = candidate_steps(input.x0, input.p, alpha, width)?;
        let lane_refs: Vec<&[f64]> = candidates.iter().map(|(_, x)| x.as_slice()).collect();
        let batch = ev.eval_batch(&lane_refs)?;
        ev.counters.ls_iterations += 1;

        // Argmin lane; +inf lanes (non-finite values) lose every comparison,
        // strict < keeps the smallest multiplier on ties.
        let mut best_lane: Option<usize> = None;
        for (j, v) in batch.values.iter().enumerate() {
            if v.is_finite() && best_lane.map_or(true, |b| *v < batch.values[b]) {
                best_lane = Some(j);
            }
        }
        let Some(lane) = best_lane else {
            // Every lane overflowed; retreat well below the grid.
            alpha = 0.5 * candidates[0].0;
            continue;
        };

        let (mut step, mut x_best) = candidates[lane].clone();
        let mut f_best = batch.values[lane];

        if cfg.polyfit_order >= 1 {
            if let Some((a_min, x_min, f_min)) =
                polyfit_candidate(ev, input, cfg, alpha, &candidates, &batch.values)?
            {
                if f_min < input.f0 && f_min < f_best {
                    step = a_min;
                    x_best = x_min;
                    f_best = f_min;
                }
            }
        }

        match try_accept(ev, cfg, input, step, x_best, f_best, None)? {
            Ok(out) => return Ok(out),
            Err(_) => {
                // If the far lane is the argmin and already has sufficient
                // decrease, the step is too short (the curvature condition
                // is what failed); shrinking can only loop, so expand.
                let lane_armijo = batch.values[lane]
                    <= input.f0 + cfg.c1 * candidates[lane].0 * input.dg0;
                match cfg.style {
                    LsStyle::Backtracking => {
                        if lane + 1 == width && lane_armijo {
                            alpha *= 2.0;
                        } else {
                            // Halve from the argmin lane's step.
                            alpha = 0.5 * candidates[lane].0;
                        }
                    }
                    LsStyle::Bracketing => {
                        if lane + 1 == width {
                            alpha *= 2.0;
                        } else {
                            let lo = if lane == 0 { 0.0 } else { candidates[lane - 1].0 };
                            let hi = candidates[lane + 1].0;
                            alpha = 0.5 * (lo + hi);
                        }
                    }
                }
            }
        }
    }
    Err(Error::LineSearchFailed(cfg.max_iterations))
}

/// Fit the batch samples and propose the fitted minimizer.
///
/// Fitting happens in the normalized variable t = step / alpha so the
/// Vandermonde nodes stay in [1/4, 2] regardless of scale. Returns the
/// evaluated candidate (step, point, value), or None on any fallback
/// condition (singular fit, no acceptable stationary point, non-finite
/// value at the candidate).
fn polyfit_candidate(
    ev: &mut Evaluator,
    input: &LsInput,
    cfg: &LineSearchCfg,
    alpha: f64,
    candidates: &[(f64, Vec<f64>)],
    values: &[f64],
) -> Result<Option<(f64, Vec<f64>, f64)>> {
    let mut ts: Vec<f64> = Vec::with_capacity(values.len());
    let mut fs: Vec<f64> = Vec::with_capacity(values.len());
    for ((step, _), v) in candidates.iter().zip(values) {
        if v.is_finite() {
            ts.push(step / alpha);
            fs.push(*v);
        }
    }
    if ts.len() < 2 {
        return Ok(None);
    }
    let order = cfg.polyfit_order.min(ts.len() - 1);
    let poly = match polyfit::polyfit_fit(&ts, &fs, order) {
        Ok(p) => p,
        Err(Error::SingularFit) => return Ok(None),
        Err(e) => return Err(e),
    };
    // Acceptance interval [alpha/4, 4 alpha] is [1/4, 4] in t.
    let Some(t_min) = polyfit::select_alpha_min(&poly, 1.0) else {
        return Ok(None);
    };
    let a_min = t_min * alpha;
    let x_min = add_scaled(input.x0, a_min, input.p);
    let f_min = ev.eval_one(&x_min)?;
    if !f_min.is_finite() {
        return Ok(None);
    }
    Ok(Some((a_min, x_min, f_min)))
}
