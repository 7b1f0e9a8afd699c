//! The batched objective contract and evaluation accounting.
//!
//! An [`Objective`] exposes the target function value and its gradient.
//! The solver never calls it directly; everything goes through an
//! [`Evaluator`], which owns the call counters. Forward calls are counted
//! per *batch* (one vectorized kernel invocation covers up to `W` points),
//! reverse calls per gradient evaluation. In legacy (coupled) mode every
//! function evaluation also computes the gradient, which is what the
//! unmodified library interface does; the counters reflect that.

use crate::error::{Error, Result};

/// A fixed-dimension point with all-finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParams("vector dimension must be >= 1".into()));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFiniteInput(format!("component {bad}")));
        }
        Ok(Vector(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Number of points evaluated per forward call. 1 is the scalar baseline,
/// 4 models 4-lane and 8 models 8-lane vectorized kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchWidth(usize);

impl BatchWidth {
    pub fn new(width: usize) -> Result<Self> {
        match width {
            1 | 4 | 8 => Ok(BatchWidth(width)),
            _ => Err(Error::InvalidParams(format!(
                "batch width must be 1, 4 or 8, got {width}"
            ))),
        }
    }

    pub fn get(&self) -> usize {
        self.0
    }
}

/// Per-run evaluation counters, the portable proxy for the cost columns of a
/// benchmark table: one forward call per batched evaluation, one reverse call
/// per gradient.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounters {
    pub forward_calls: u64,
    pub reverse_calls: u64,
    pub ls_iterations: u64,
    pub outer_iterations: u64,
}

/// The objective contract: value and gradient of `f: R^n -> R`.
///
/// Implementations must be pure (same input, same output) so that batched
/// line search is deterministic, and must be safe to evaluate at the lanes
/// of one batch in data-parallel fashion.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Analytic (or pathwise) gradient; same dimension as `x`.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

/// Result of one batched forward evaluation. Non-finite lane values are
/// replaced by `+inf` (so the argmin skips them) and flagged, instead of
/// aborting the batch.
#[derive(Debug, Clone)]
pub struct BatchValues {
    pub values: Vec<f64>,
    pub had_nonfinite: bool,
}

/// Counting wrapper around an [`Objective`]. Owns the counters for one run.
pub struct Evaluator<'a> {
    objective: &'a dyn Objective,
    width: BatchWidth,
    legacy: bool,
    pub counters: EvalCounters,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a dyn Objective, width: BatchWidth, legacy: bool) -> Self {
        Evaluator {
            objective,
            width,
            legacy,
            counters: EvalCounters::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn width(&self) -> usize {
        self.width.get()
    }

    pub fn legacy(&self) -> bool {
        self.legacy
    }

    /// Evaluate `f` at `W` points in one forward call.
    ///
    /// Counts exactly one forward invocation regardless of the number of
    /// lanes. The batch length must equal the configured width; pad with
    /// repeats of any lane to fill unused slots.
    pub fn eval_batch(&mut self, points: &[&[f64]]) -> Result<BatchValues> {
        if points.len() != self.width.get() {
            return Err(Error::BatchWidthMismatch {
                width: self.width.get(),
                got: points.len(),
            });
        }
        let n = self.objective.dim();
        for p in points {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                });
            }
        }
        self.counters.forward_calls += 1;
        let mut had_nonfinite = false;
        let values = points
            .iter()
            .map(|p| {
                let v = self.objective.value(p);
                if v.is_finite() {
                    v
                } else {
                    had_nonfinite = true;
                    f64::INFINITY
                }
            })
            .collect();
        Ok(BatchValues {
            values,
            had_nonfinite,
        })
    }

    /// Convenience: evaluate a single point, padding the batch with repeats.
    pub fn eval_one(&mut self, x: &[f64]) -> Result<f64> {
        let points: Vec<&[f64]> = std::iter::repeat(x).take(self.width.get()).collect();
        Ok(self.eval_batch(&points)?.values[0])
    }

    /// Evaluate the gradient; one reverse call.
    ///
    /// The forward value at `x` is never recomputed here: when the solver
    /// needs `f(x)` it already has it from the batch that selected `x`.
    pub fn eval_gradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.objective.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        self.counters.reverse_calls += 1;
        let g = self.objective.gradient(x);
        if let Some(bad) = g.iter().find(|c| !c.is_finite()) {
            return Err(Error::Numerical(format!("gradient component {bad}")));
        }
        Ok(g)
    }

    /// Coupled evaluation: value and gradient in one call, the unmodified
    /// interface. Costs one forward and one reverse call.
    pub fn eval_coupled(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.objective.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        self.counters.forward_calls += 1;
        self.counters.reverse_calls += 1;
        let v = self.objective.value(x);
        let g = self.objective.gradient(x);
        if let Some(bad) = g.iter().find(|c| !c.is_finite()) {
            return Err(Error::Numerical(format!("gradient component {bad}")));
        }
        Ok((v, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Square;
    impl Objective for Square {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            x[0] * x[0]
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            vec![2.0 * x[0]]
        }
    }

    struct HalfNormSq(usize);
    impl Objective for HalfNormSq {
        fn dim(&self) -> usize {
            self.0
        }
        fn value(&self, x: &[f64]) -> f64 {
            0.5 * crate::linalg::dot(x, x)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.to_vec()
        }
    }

    #[test]
    fn vector_rejects_nan() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![]).is_err());
        assert_eq!(Vector::new(vec![1.0, 2.0]).unwrap().dim(), 2);
    }

    #[test]
    fn batch_width_domain() {
        assert!(BatchWidth::new(1).is_ok());
        assert!(BatchWidth::new(4).is_ok());
        assert!(BatchWidth::new(8).is_ok());
        assert!(BatchWidth::new(2).is_err());
        assert!(BatchWidth::new(0).is_err());
    }

    #[test]
    fn eval_batch_square() {
        let obj = Square;
        let mut ev = Evaluator::new(&obj, BatchWidth::new(4).unwrap(), false);
        let pts: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let out = ev.eval_batch(&refs).unwrap();
        assert_eq!(out.values, vec![1.0, 4.0, 9.0, 16.0]);
        assert_eq!(ev.counters.forward_calls, 1);
        assert!(!out.had_nonfinite);
    }

    #[test]
    fn eval_batch_identical_points_pure() {
        let obj = Square;
        let mut ev = Evaluator::new(&obj, BatchWidth::new(4).unwrap(), false);
        let p = vec![1.5];
        let refs: Vec<&[f64]> = vec![&p, &p, &p, &p];
        let out = ev.eval_batch(&refs).unwrap();
        assert!(out.values.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn eval_batch_counts_batches_not_lanes() {
        let obj = Square;
        let mut ev = Evaluator::new(&obj, BatchWidth::new(8).unwrap(), false);
        let p = vec![1.0];
        let refs: Vec<&[f64]> = std::iter::repeat(p.as_slice()).take(8).collect();
        ev.eval_batch(&refs).unwrap();
        ev.eval_batch(&refs).unwrap();
        assert_eq!(ev.counters.forward_calls, 2);
    }

    #[test]
    fn eval_batch_wrong_length() {
        let obj = Square;
        let mut ev = Evaluator::new(&obj, BatchWidth::new(4).unwrap(), false);
        let p = vec![1.0];
        let refs: Vec<&[f64]> = vec![&p, &p];
        assert!(matches!(
            ev.eval_batch(&refs),
            Err(Error::BatchWidthMismatch { .. })
        ));
    }

    #[test]
    fn eval_batch_dimension_mismatch() {
        let obj = HalfNormSq(2);
        let mut ev = Evaluator::new(&obj, BatchWidth::new(1).unwrap(), false);
        let p = vec![1.0, 2.0, 3.0];
        assert!(matches!(
            ev.eval_batch(&[&p]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nonfinite_lane_becomes_inf_with_flag() {
        struct LogObj;
        impl Objective for LogObj {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[0].ln()
            }
            fn gradient(&self, x: &[f64]) -> Vec<f64> {
                vec![1.0 / x[0]]
            }
        }
        let obj = LogObj;
        let mut ev = Evaluator::new(&obj, BatchWidth::new(4).unwrap(), false);
        let pts: Vec<Vec<f64>> = vec![vec![1.0], vec![-1.0], vec![2.0], vec![0.5]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let out = ev.eval_batch(&refs).unwrap();
        assert!(out.had_nonfinite);
        assert_eq!(out.values[1], f64::INFINITY);
        assert!(out.values[0].is_finite());
        assert_eq!(ev.counters.forward_calls, 1);
    }

    #[test]
    fn gradient_of_quadratic() {
        let obj = HalfNormSq(2);
        let mut ev = Evaluator::new(&obj, BatchWidth::new(1).unwrap(), false);
        let g = ev.eval_gradient(&[3.0, 4.0]).unwrap();
        assert_eq!(g, vec![3.0, 4.0]);
        assert_eq!(ev.counters.reverse_calls, 1);
        assert_eq!(ev.counters.forward_calls, 0);
    }

    #[test]
    fn coupled_counts_both() {
        let obj = HalfNormSq(2);
        let mut ev = Evaluator::new(&obj, BatchWidth::new(1).unwrap(), true);
        let (v, g) = ev.eval_coupled(&[3.0, 4.0]).unwrap();
        assert_eq!(v, 12.5);
        assert_eq!(g, vec![3.0, 4.0]);
        assert_eq!(ev.counters.forward_calls, 1);
        assert_eq!(ev.counters.reverse_calls, 1);
    }
}
