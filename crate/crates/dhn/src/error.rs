use std::path::PathBuf;

/// Errors produced by network construction, evaluation and analysis.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precision: {0}")]
    Precision(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
