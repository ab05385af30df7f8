use thiserror::Error;

/// Errors produced by the geometry, set and estimation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SqcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("numeric failure in {what}: residual {residual:e} after {iterations} iterations")]
    NumericFailure {
        what: String,
        residual: f64,
        iterations: usize,
    },
}

impl SqcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SqcError::InvalidArgument(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        SqcError::UnsupportedCombination(msg.into())
    }
}

pub type Result<T, E = SqcError> = std::result::Result<T, E>;
