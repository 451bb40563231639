//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error(
        "symmetric eigendecomposition failed for order-{order} matrix (fro norm {fro_norm:.3e})"
    )]
    EigenFailure { order: usize, fro_norm: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("method requires an exact proximal operator, but the problem does not provide one")]
    ExactProxUnavailable,

    #[error("inner solve failed: {0}")]
    InnerFailure(String),

    #[error("empty trace: {0}")]
    EmptyTrace(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}
