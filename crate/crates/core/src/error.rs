use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    /// No quantum state (or no detector model) explains the observed statistics.
    #[error("inconsistent statistics: {0}")]
    InconsistentStatistics(String),

    /// The solver stopped without meeting its tolerances. `best_bound` carries
    /// the last objective estimate when one is available.
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        best_bound: Option<f64>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
