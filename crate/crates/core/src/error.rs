use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("spectral range not certified: requested {requested}, certified up to {certified}")]
    Uncertified { requested: f64, certified: f64 },

    #[error("zero field where a nonzero field is required")]
    ZeroField,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("line search failed at iteration {iteration} (residual {residual:e})")]
    LineSearch { iteration: usize, residual: f64 },

    #[error("branch not applicable: {0}")]
    NotApplicable(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
