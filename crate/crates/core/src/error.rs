use thiserror::Error;

/// Errors surfaced by the solver, line search, and supporting modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("batch length {got} does not match configured width {width}")]
    BatchWidthMismatch { width: usize, got: usize },

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("non-finite value encountered: {0}")]
    Numerical(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line search found no acceptable step within {0} iterations")]
    LineSearchFailed(usize),

    #[error("polynomial fit is singular (degenerate abscissae)")]
    SingularFit,

    #[error("zero polynomial has no roots")]
    ZeroPolynomial,

    #[error("unknown problem id {0:?}; known ids: curve, expectation, rosenbrock")]
    UnknownProblem(String),

    #[error("comparison refused: rows come from different problems or seeds")]
    ComparisonMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
