//! Benchmark objectives with analytic gradients.
//!
//! Two problems mirror the calibration experiments at desk scale: a
//! 33-parameter / 14-output least-squares curve fit and a frozen-sample
//! Monte Carlo expectation loss. Rosenbrock is the convergence sentinel.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;

/// Quadratic loss over a synthetic smooth curve map g: R^33 -> R^14,
/// f(x) = sum_i (g(x)_i - g(x_min)_i)^2 with
/// g(x)_i = sum_j A_ij tanh(x_j) + sum_j Q_ij x_j^2.
///
/// Row scales of A and Q span two decades, which makes the Gauss-Newton
/// matrix ill-conditioned the way a real bootstrapped curve is.
pub struct CurveCalibrationProblem {
    n: usize,
    m_out: usize,
    a: Vec<f64>, // m_out x n, row-major
    q: Vec<f64>, // m_out x n, row-major
    target: Vec<f64>,
    x_min: Vec<f64>,
    x0: Vec<f64>,
    seed: u64,
}

pub const CURVE_DIM: usize = 33;
pub const CURVE_OUTPUTS: usize = 14;

/// Deterministic problem instance with a starting point sampled within
/// +-10% of the target parameters.
pub fn make_curve_problem(seed: u64) -> CurveCalibrationProblem {
    let n = CURVE_DIM;
    let m_out = CURVE_OUTPUTS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let x_min: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    // Geometric row scales 1 .. 1e-3.
    let row_scale: Vec<f64> = (0..m_out)
        .map(|i| 10f64.powf(-3.0 * i as f64 / (m_out - 1) as f64))
        .collect();
    let mut a = vec![0.0; m_out * n];
    let mut q = vec![0.0; m_out * n];
    for i in 0..m_out {
        for j in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            a[i * n + j] = row_scale[i] * z;
            let z: f64 = StandardNormal.sample(&mut rng);
            q[i * n + j] = 0.3 * row_scale[i] * z;
        }
    }
    let x0: Vec<f64> = x_min
        .iter()
        .map(|c| rng.random_range(0.9 * c..1.1 * c))
        .collect();

    let mut problem = CurveCalibrationProblem {
        n,
        m_out,
        a,
        q,
        target: vec![0.0; m_out],
        x_min,
        x0,
        seed,
    };
    problem.target = problem.curve_map(&problem.x_min);
    problem
}

impl CurveCalibrationProblem {
    fn curve_map(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m_out];
        for i in 0..self.m_out {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.a[i * self.n + j] * x[j].tanh();
                acc += self.q[i * self.n + j] * x[j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn x_min(&self) -> &[f64] {
        &self.x_min
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn config(&self) -> ProblemConfig {
        ProblemConfig {
            problem: "curve".into(),
            seed: self.seed,
            dim: Some(self.n),
            outputs: Some(self.m_out),
            terms: None,
            paths: None,
        }
    }
}

impl Objective for CurveCalibrationProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.curve_map(x)
            .iter()
            .zip(&self.target)
            .map(|(gi, ti)| (gi - ti) * (gi - ti))
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let g = self.curve_map(x);
        let mut grad = vec![0.0; self.n];
        for j in 0..self.n {
            let t = x[j].tanh();
            let sech2 = 1.0 - t * t;
            let mut acc = 0.0;
            for i in 0..self.m_out {
                let r = g[i] - self.target[i];
                let dgij = self.a[i * self.n + j] * sech2 + 2.0 * self.q[i * self.n + j] * x[j];
                acc += 2.0 * r * dgij;
            }
            grad[j] = acc;
        }
        grad
    }
}

/// Expectation-form loss G(x) = 1/2 sum_i (mean_w y_i(x, w) - C_i)^2 over a
/// frozen sample of noise (common random numbers), with call-style payoffs
/// y_i = smoothmax(sum_j x_j Z_ijw - K_i) on a linear factor model.
///
/// The max is smoothed (softplus with beta = 50) so the pathwise gradient is
/// exact everywhere. Targets C_i are the sample means at `x_min`, making
/// G(x_min) = 0 by construction.
pub struct ExpectationLossProblem {
    n: usize,
    m: usize,
    paths: usize,
    z: Vec<f64>, // paths x m x n, row-major
    strikes: Vec<f64>,
    targets: Vec<f64>,
    x_min: Vec<f64>,
    x0: Vec<f64>,
    seed: u64,
    beta: f64,
}

/// softplus(beta u) / beta, overflow-safe.
fn smooth_max(u: f64, beta: f64) -> f64 {
    let t = beta * u;
    if t > 30.0 {
        u + (-t).exp().ln_1p() / beta
    } else {
        t.exp().ln_1p() / beta
    }
}

/// d/du of [`smooth_max`]: the logistic sigmoid at beta u.
fn smooth_max_deriv(u: f64, beta: f64) -> f64 {
    let t = beta * u;
    if t > 30.0 {
        1.0
    } else if t < -30.0 {
        t.exp()
    } else {
        1.0 / (1.0 + (-t).exp())
    }
}

pub fn make_expectation_problem(
    seed: u64,
    n: usize,
    m: usize,
    paths: usize,
) -> Result<ExpectationLossProblem> {
    if paths < 100 {
        return Err(Error::InvalidParams(format!(
            "need at least 100 paths, got {paths}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_min: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let strikes: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
    let z: Vec<f64> = (0..paths * m * n)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let x0: Vec<f64> = x_min.iter().map(|c| 0.9 * c).collect();

    let mut problem = ExpectationLossProblem {
        n,
        m,
        paths,
        z,
        strikes,
        targets: vec![0.0; m],
        x_min,
        x0,
        seed,
        beta: 50.0,
    };
    problem.targets = problem.sample_means(&problem.x_min);
    Ok(problem)
}

impl ExpectationLossProblem {
    fn sample_means(&self, x: &[f64]) -> Vec<f64> {
        let mut means = vec![0.0; self.m];
        for w in 0..self.paths {
            for i in 0..self.m {
                let base = (w * self.m + i) * self.n;
                let mut u = -self.strikes[i];
                for j in 0..self.n {
                    u += x[j] * self.z[base + j];
                }
                means[i] += smooth_max(u, self.beta);
            }
        }
        for mi in means.iter_mut() {
            *mi /= self.paths as f64;
        }
        means
    }

    pub fn x_min(&self) -> &[f64] {
        &self.x_min
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn config(&self) -> ProblemConfig {
        ProblemConfig {
            problem: "expectation".into(),
            seed: self.seed,
            dim: Some(self.n),
            outputs: None,
            terms: Some(self.m),
            paths: Some(self.paths),
        }
    }
}

impl Objective for ExpectationLossProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self
            .sample_means(x)
            .iter()
            .zip(&self.targets)
            .map(|(ei, ci)| (ei - ci) * (ei - ci))
            .sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        // Pathwise: dG/dx_j = sum_i (E y_i - C_i) mean_w sigma(beta u) Z_ijw
        let means = self.sample_means(x);
        let resid: Vec<f64> = means
            .iter()
            .zip(&self.targets)
            .map(|(ei, ci)| ei - ci)
            .collect();
        let mut grad = vec![0.0; self.n];
        for w in 0..self.paths {
            for i in 0..self.m {
                let base = (w * self.m + i) * self.n;
                let mut u = -self.strikes[i];
                for j in 0..self.n {
                    u += x[j] * self.z[base + j];
                }
                let weight = resid[i] * smooth_max_deriv(u, self.beta) / self.paths as f64;
                for j in 0..self.n {
                    grad[j] += weight * self.z[base + j];
                }
            }
        }
        grad
    }
}

/// Standard chained Rosenbrock on pairs, minimum 0 at the all-ones vector.
pub struct RosenbrockProblem {
    n: usize,
}

impl RosenbrockProblem {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "Rosenbrock dimension must be even and positive, got {n}"
            )));
        }
        Ok(RosenbrockProblem { n })
    }

    /// Classic starting point (-1.2, 1, -1.2, 1, ...).
    pub fn x0(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| if i % 2 == 0 { -1.2 } else { 1.0 })
            .collect()
    }
}

impl Objective for RosenbrockProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.n / 2 {
            let (a, b) = (x[2 * k], x[2 * k + 1]);
            acc += 100.0 * (b - a * a) * (b - a * a) + (1.0 - a) * (1.0 - a);
        }
        acc
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for k in 0..self.n / 2 {
            let (a, b) = (x[2 * k], x[2 * k + 1]);
            g[2 * k] = -400.0 * a * (b - a * a) - 2.0 * (1.0 - a);
            g[2 * k + 1] = 200.0 * (b - a * a);
        }
        g
    }
}

/// Plain-text (TOML) description of a problem instance, for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub problem: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
}

impl ProblemConfig {
    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("problem config serializes")
    }

    pub fn from_config_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Instantiate the described problem; returns the objective and x0.
    pub fn build(&self) -> Result<(Box<dyn Objective>, Vec<f64>)> {
        match self.problem.as_str() {
            "curve" => {
                let p = make_curve_problem(self.seed);
                let x0 = p.x0().to_vec();
                Ok((Box::new(p), x0))
            }
            "expectation" => {
                let p = make_expectation_problem(
                    self.seed,
                    self.dim.unwrap_or(8),
                    self.terms.unwrap_or(6),
                    self.paths.unwrap_or(1000),
                )?;
                let x0 = p.x0().to_vec();
                Ok((Box::new(p), x0))
            }
            "rosenbrock" => {
                let p = RosenbrockProblem::new(self.dim.unwrap_or(2))?;
                let x0 = p.x0();
                Ok((Box::new(p), x0))
            }
            other => Err(Error::UnknownProblem(other.into())),
        }
    }
}
