//! Least-squares polynomial fitting and real-root extraction for the
//! polynomial-fit line search.
//!
//! The line search samples f along the search direction at the batch's step
//! grid, fits a low-degree polynomial through the (step, value) pairs, and
//! jumps to the polynomial's minimizing stationary point when it falls inside
//! the acceptance interval [alpha/4, 4 alpha].

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Dense polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::new(vec![0.0]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect();
        Polynomial::new(coeffs)
    }

    /// Drop near-zero leading coefficients (threshold 1e-12 * max |p_i|).
    fn trimmed(&self) -> Vec<f64> {
        let maxc = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let thresh = 1e-12 * maxc;
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().unwrap().abs() <= thresh {
            c.pop();
        }
        c
    }
}

/// Least-squares polynomial of the given order through (alphas, values),
/// solved via QR factorization of the Vandermonde system.
///
/// With exactly order+1 distinct abscissae the result interpolates.
pub fn polyfit_fit(alphas: &[f64], values: &[f64], order: usize) -> Result<Polynomial> {
    if alphas.len() != values.len() {
        return Err(Error::InvalidParams(format!(
            "abscissae/value length mismatch: {} vs {}",
            alphas.len(),
            values.len()
        )));
    }
    let mut distinct: Vec<f64> = Vec::new();
    for &a in alphas {
        if !distinct.iter().any(|&d| (d - a).abs() <= 1e-14 * (1.0 + a.abs())) {
            distinct.push(a);
        }
    }
    if distinct.len() < order + 1 {
        return Err(Error::SingularFit);
    }

    let m = alphas.len();
    let cols = order + 1;
    let mut vander = DMatrix::<f64>::zeros(m, cols);
    for (i, &a) in alphas.iter().enumerate() {
        let mut pw = 1.0;
        for j in 0..cols {
            vander[(i, j)] = pw;
            pw *= a;
        }
    }
    let rhs = DVector::from_column_slice(values);

    let qr = vander.qr();
    let r = qr.r();
    let max_diag = (0..cols).map(|j| r[(j, j)].abs()).fold(0.0f64, f64::max);
    if max_diag == 0.0 || (0..cols).any(|j| r[(j, j)].abs() <= 1e-13 * max_diag) {
        return Err(Error::SingularFit);
    }
    let qtb = qr.q().transpose() * rhs;
    let sol = r
        .solve_upper_triangular(&qtb)
        .ok_or(Error::SingularFit)?;
    Ok(Polynomial::new(sol.iter().copied().collect()))
}

/// All real roots, ascending, multiplicities collapsed.
///
/// Degree 1 and 2 use closed forms; higher degrees go through companion
/// matrix eigenvalues. Eigenvalues with imaginary part below
/// 1e-8 * (1 + |re|) count as real.
pub fn poly_real_roots(poly: &Polynomial) -> Result<Vec<f64>> {
    let c = poly.trimmed();
    let d = c.len() - 1;
    if d == 0 {
        if c[0] == 0.0 {
            return Err(Error::ZeroPolynomial);
        }
        return Ok(vec![]);
    }

    let mut roots: Vec<f64> = match d {
        1 => vec![-c[0] / c[1]],
        2 => {
            let (a, b, c0) = (c[2], c[1], c[0]);
            let disc = b * b - 4.0 * a * c0;
            if disc < 0.0 {
                vec![]
            } else if disc == 0.0 {
                vec![-b / (2.0 * a)]
            } else {
                // Citardauq-stable split
                let q = -0.5 * (b + b.signum() * disc.sqrt());
                let mut r = vec![q / a];
                if q != 0.0 {
                    r.push(c0 / q);
                } else {
                    r.push(0.0);
                }
                r
            }
        }
        _ => {
            let lead = c[d];
            let mut comp = DMatrix::<f64>::zeros(d, d);
            for i in 1..d {
                comp[(i, i - 1)] = 1.0;
            }
            for i in 0..d {
                comp[(i, d - 1)] = -c[i] / lead;
            }
            comp.complex_eigenvalues()
                .iter()
                .filter(|ev| ev.im.abs() <= 1e-8 * (1.0 + ev.re.abs()))
                .map(|ev| ev.re)
                .collect()
        }
    };

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut collapsed: Vec<f64> = Vec::new();
    for r in roots {
        if !collapsed
            .iter()
            .any(|&p| (p - r).abs() <= 1e-8 * (1.0 + r.abs()))
        {
            collapsed.push(r);
        }
    }
    Ok(collapsed)
}

/// Minimizing stationary point of the fitted polynomial, if acceptable.
///
/// Takes the smallest root of the derivative that has positive second
/// derivative (a local minimum) and returns it only when it lies inside
/// [alpha/4, 4 alpha].
pub fn select_alpha_min(poly: &Polynomial, alpha: f64) -> Option<f64> {
    debug_assert!(alpha > 0.0);
    let deriv = poly.derivative();
    if deriv.trimmed().len() < 2 && deriv.coeffs()[0] == 0.0 {
        return None;
    }
    let stationary = poly_real_roots(&deriv).ok()?;
    let second = deriv.derivative();
    let min = stationary.into_iter().find(|&r| second.eval(r) > 0.0)?;
    if min >= 0.25 * alpha && min <= 4.0 * alpha {
        Some(min)
    } else {
        None
    }
}
