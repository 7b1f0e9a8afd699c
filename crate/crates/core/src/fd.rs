//! Finite-difference directional derivatives.
//!
//! During line search the termination conditions only need df/dalpha along
//! the search direction, not the full gradient. A central-difference stencil
//! along `p` gives that from forward evaluations alone, so gradient calls can
//! wait until the line search has accepted a step.

use crate::error::{Error, Result};
use crate::linalg::add_scaled;
use crate::objective::Evaluator;

/// Central difference stencil: number of points, step size, and per-offset
/// coefficients (offsets run from the most negative to the most positive,
/// excluding zero).
#[derive(Debug, Clone, PartialEq)]
pub struct FdScheme {
    points: usize,
    h: f64,
    coeffs: Vec<f64>,
}

/// Default central finite difference coefficients for a first derivative,
/// offsets -count/2..-1, 1..count/2.
pub fn default_coeffs(count: usize) -> Result<Vec<f64>> {
    match count {
        2 => Ok(vec![-1.0 / 2.0, 1.0 / 2.0]),
        4 => Ok(vec![1.0 / 12.0, -2.0 / 3.0, 2.0 / 3.0, -1.0 / 12.0]),
        6 => Ok(vec![
            -1.0 / 60.0,
            3.0 / 20.0,
            -3.0 / 4.0,
            3.0 / 4.0,
            -3.0 / 20.0,
            1.0 / 60.0,
        ]),
        8 => Ok(vec![
            1.0 / 280.0,
            -4.0 / 105.0,
            1.0 / 5.0,
            -4.0 / 5.0,
            4.0 / 5.0,
            -1.0 / 5.0,
            4.0 / 105.0,
            -1.0 / 280.0,
        ]),
        _ => Err(Error::Config(format!(
            "central difference point count must be 2, 4, 6 or 8, got {count}"
        ))),
    }
}

impl FdScheme {
    pub fn new(points: usize, h: f64) -> Result<Self> {
        if h <= 0.0 || !h.is_finite() {
            return Err(Error::Config(format!("fd step h must be positive, got {h}")));
        }
        let coeffs = default_coeffs(points)?;
        Ok(FdScheme { points, h, coeffs })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Replace the coefficients. Only the length is validated; user-supplied
    /// schemes may be one-sided or asymmetric.
    pub fn set_coeffs(mut self, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != self.points {
            return Err(Error::Config(format!(
                "coefficient list length {} does not match point count {}",
                coeffs.len(),
                self.points
            )));
        }
        self.coeffs = coeffs;
        Ok(self)
    }
}

/// Signed stencil offsets in units of `h`: -count/2..-1, 1..count/2.
pub fn offsets(count: usize) -> Vec<i32> {
    let half = (count / 2) as i32;
    (-half..=half).filter(|&k| k != 0).collect()
}

/// Stencil points `x + k*h*p` for the signed offsets `k`, most negative
/// first. `x` itself is excluded.
pub fn fd_points(x: &[f64], p: &[f64], h: f64, count: usize) -> Vec<Vec<f64>> {
    offsets(count)
        .into_iter()
        .map(|k| add_scaled(x, k as f64 * h, p))
        .collect()
}

/// Directional derivative df/dalpha at `x` along `p` via the scheme's
/// stencil: sum_i c_i f(x + k_i h p) / h.
///
/// Uses ceil(points / W) forward batches; unused lanes are padded with
/// repeats of the first stencil point and ignored.
pub fn directional_derivative(
    ev: &mut Evaluator,
    x: &[f64],
    p: &[f64],
    scheme: &FdScheme,
) -> Result<f64> {
    let pts = fd_points(x, p, scheme.h, scheme.points);
    let values = eval_points_batched(ev, &pts)?;
    let mut acc = 0.0;
    for (c, v) in scheme.coeffs.iter().zip(&values) {
        acc += c * v;
    }
    Ok(acc / scheme.h)
}

/// One-sided variant (f(x + h p) - f(x)) / h; needs f(x) already known.
pub fn directional_derivative_one_sided(
    ev: &mut Evaluator,
    x: &[f64],
    fx: f64,
    p: &[f64],
    h: f64,
) -> Result<f64> {
    let pt = add_scaled(x, h, p);
    let values = eval_points_batched(ev, std::slice::from_ref(&pt))?;
    Ok((values[0] - fx) / h)
}

/// Evaluate arbitrary-count points through the batched interface, padding
/// each batch to the evaluator's width. Errors if any value is non-finite
/// (the line search treats that as a failed condition).
pub fn eval_points_batched(ev: &mut Evaluator, pts: &[Vec<f64>]) -> Result<Vec<f64>> {
    let w = ev.width();
    let mut values = Vec::with_capacity(pts.len());
    for chunk in pts.chunks(w) {
        let mut lane_refs: Vec<&[f64]> = chunk.iter().map(|p| p.as_slice()).collect();
        while lane_refs.len() < w {
            lane_refs.push(&pts[0]);
        }
        let batch = ev.eval_batch(&lane_refs)?;
        if batch.values[..chunk.len()].iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "non-finite value at finite-difference stencil point".into(),
            ));
        }
        values.extend_from_slice(&batch.values[..chunk.len()]);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{BatchWidth, Objective};

    struct Fn1d(fn(f64) -> f64, fn(f64) -> f64);
    impl Objective for Fn1d {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            (self.0)(x[0])
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            vec![(self.1)(x[0])]
        }
    }

    #[test]
    fn default_coeffs_antisymmetric_and_zero_sum() {
        for count in [2usize, 4, 6, 8] {
            let c = default_coeffs(count).unwrap();
            let sum: f64 = c.iter().sum();
            assert!(sum.abs() < 1e-15, "count {count}");
            for i in 0..count / 2 {
                assert_eq!(c[i], -c[count - 1 - i], "count {count} offset {i}");
            }
        }
        assert!(default_coeffs(3).is_err());
    }

    #[test]
    fn fd_points_four() {
        let pts = fd_points(&[0.0], &[1.0], 0.1, 4);
        let flat: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        for (a, b) in flat.iter().zip(&[-0.2, -0.1, 0.1, 0.2]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn fd_points_two_and_degenerate_direction() {
        let pts = fd_points(&[1.0], &[1.0], 0.5, 2);
        assert_eq!(pts, vec![vec![0.5], vec![1.5]]);
        let pts = fd_points(&[1.0], &[0.0], 0.5, 8);
        assert!(pts.iter().all(|p| p[0] == 1.0));
    }

    #[test]
    fn linear_function_exact_with_two_points() {
        let obj = Fn1d(|x| 3.0 * x, |_| 3.0);
        let mut ev = Evaluator::new(&obj, BatchWidth::new(4).unwrap(), false);
        let scheme = FdScheme::new(2, 0.37).unwrap();
        let dg = directional_derivative(&mut ev, &[5.0], &[1.0], &scheme).unwrap();
        assert!((dg - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_exact_with_four_points() {
        let obj = Fn1d(|x| x * x, |x| 2.0 * x);
        let mut ev = Evaluator::new(&obj, BatchWidth::new(4).unwrap(), false);
        let scheme = FdScheme::new(4, 0.1).unwrap();
        let dg = directional_derivative(&mut ev, &[1.0], &[1.0], &scheme).unwrap();
        assert!((dg - 2.0).abs() < 1e-12, "dg = {dg}");
        // one batch, point count == width
        assert_eq!(ev.counters.forward_calls, 1);
    }

    #[test]
    fn sine_eight_points() {
        let obj = Fn1d(|x| x.sin(), |x| x.cos());
        let mut ev = Evaluator::new(&obj, BatchWidth::new(8).unwrap(), false);
        let scheme = FdScheme::new(8, 1e-3).unwrap();
        let dg = directional_derivative(&mut ev, &[0.0], &[1.0], &scheme).unwrap();
        assert!((dg - 1.0).abs() < 1e-12, "dg = {dg}");
        assert_eq!(ev.counters.forward_calls, 1);
    }

    #[test]
    fn stencil_splits_across_narrow_batches() {
        let obj = Fn1d(|x| x * x, |x| 2.0 * x);
        let mut ev = Evaluator::new(&obj, BatchWidth::new(1).unwrap(), false);
        let scheme = FdScheme::new(4, 0.1).unwrap();
        let dg = directional_derivative(&mut ev, &[1.0], &[1.0], &scheme).unwrap();
        assert!((dg - 2.0).abs() < 1e-12);
        assert_eq!(ev.counters.forward_calls, 4);
    }

    #[test]
    fn one_sided_variant() {
        let obj = Fn1d(|x| 3.0 * x, |_| 3.0);
        let mut ev = Evaluator::new(&obj, BatchWidth::new(1).unwrap(), false);
        let dg = directional_derivative_one_sided(&mut ev, &[2.0], 6.0, &[1.0], 1e-6).unwrap();
        assert!((dg - 3.0).abs() < 1e-6);
        assert_eq!(ev.counters.forward_calls, 1);
    }

    #[test]
    fn set_coeffs_length_check() {
        let scheme = FdScheme::new(4, 0.1).unwrap();
        assert!(scheme.clone().set_coeffs(vec![0.0; 3]).is_err());
        let custom = scheme.set_coeffs(vec![0.0, -1.0, 1.0, 0.0]).unwrap();
        assert_eq!(custom.coeffs(), &[0.0, -1.0, 1.0, 0.0]);
    }

    #[test]
    fn nonfinite_stencil_value_is_error() {
        let obj = Fn1d(|x| x.ln(), |x| 1.0 / x);
        let mut ev = Evaluator::new(&obj, BatchWidth::new(4).unwrap(), false);
        let scheme = FdScheme::new(4, 1.0).unwrap();
        let r = directional_derivative(&mut ev, &[0.5], &[1.0], &scheme);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
