use thiserror::Error;

/// Errors produced by the optimization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("power iteration did not reach relative tolerance {tol:e} within {iterations} iterations")]
    PowerIterationCap { tol: f64, iterations: usize },

    #[error("least-squares factorization failed: {0}")]
    Factorization(String),

    #[error("bundle is empty")]
    EmptyBundle,

    #[error("two-cut model update requires the previous proximal step after the first update")]
    MissingProxInfo,

    #[error("input contains a non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("no KKT-consistent active set found for the subproblem")]
    NoActiveSet,

    #[error("malformed {what}: {reason}")]
    Parse { what: &'static str, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
