//! Quasi-Newton minimization (BFGS and L-BFGS) with SIMD-style batched line
//! search.
//!
//! The solver evaluates the objective at several trial steps per line-search
//! iteration (modeling 4- or 8-lane vectorized kernels), optionally fits a
//! polynomial to the sampled values and jumps to its minimizer, and replaces
//! the gradient dot product inside the line search with central
//! finite-difference directional derivatives so that full gradients are only
//! computed once per accepted iterate.
//!
//! Entry points:
//! - [`solver::minimize`] minimizes an [`objective::Objective`] under
//!   [`solver::SolverParams`].
//! - [`problems`] provides benchmark objectives with analytic gradients.
//! - [`bench`] runs labeled solver configurations and emits the metric table
//!   (iterations, forward/reverse calls, line-search iterations).

pub mod bench;
pub mod error;
pub mod fd;
pub mod linalg;
pub mod linesearch;
pub mod objective;
pub mod polyfit;
pub mod problems;
pub mod solver;

pub use error::Error;
pub use objective::{BatchWidth, EvalCounters, Evaluator, Objective, Vector};
pub use solver::{
    minimize, HessianMode, LsCondition, LsStyle, RunMetrics, SolverParams, TerminationReason,
};
