use thiserror::Error;

/// Errors produced by the interval, regression and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root finding did not converge after {iterations} iterations (target {target})")]
    Convergence { iterations: usize, target: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("neighbor count {k} out of range [{min}, {max}]")]
    NeighborCount { k: usize, min: usize, max: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("singular design matrix: {0}")]
    Singular(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
