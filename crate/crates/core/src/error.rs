use thiserror::Error;

/// Errors raised by the inference library.
#[derive(Debug, Error)]
pub enum NdpError {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data or configuration failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// Two vectors that must agree in length do not.
    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    /// Every importance weight in a batch is zero (or underflowed).
    #[error("degenerate batch: {0}")]
    Degenerate(String),

    /// The requested query has no supported evaluation path.
    #[error("unsupported query: {0}")]
    Unsupported(String),

    /// Unknown scenario or resource name.
    #[error("unknown name `{0}`")]
    Lookup(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl NdpError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        NdpError::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        NdpError::Validation(msg.into())
    }
}

impl From<csv::Error> for NdpError {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => NdpError::Io(io),
                _ => unreachable!(),
            }
        } else {
            NdpError::Parse(err.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, NdpError>;
