use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// Non-finite values appeared while iterating the estimator.
    #[error("estimator failure after {iterations} iterations")]
    EstimatorFailure { iterations: usize },

    #[error("problem too large for exact enumeration: dimension {dim} > {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("logic error: {0}")]
    Logic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
