use std::path::PathBuf;

use thiserror::Error;

/// Result type used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the support or parameter space of a function.
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// A log-density or gradient evaluated to a non-finite value.
    #[error("non-finite evaluation{}", match .coordinate { Some(c) => format!(" at coordinate {c}"), None => String::new() })]
    NonFinite { coordinate: Option<usize> },

    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// Input data is structurally valid but inconsistent with the model.
    #[error("data error: {0}")]
    Data(String),

    /// Input files or configuration failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("missing column `{column}` in {} (line {line})", .path.display())]
    MissingColumn {
        path: PathBuf,
        column: String,
        line: u64,
    },

    #[error("sampler initialization failed: {0}")]
    Initialization(String),

    #[error("warmup adaptation failed in chain {chain}: {reason}")]
    Adaptation { chain: usize, reason: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }
}
