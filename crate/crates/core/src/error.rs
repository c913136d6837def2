use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants map onto the CLI exit codes: `Domain`, `Parse` and `Refused`
/// are usage problems (exit 2), `Numeric` is an internal numeric failure
/// (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("refused: {0}")]
    Refused(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
