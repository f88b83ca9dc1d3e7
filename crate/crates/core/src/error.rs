use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A corpus line or row that could not be decoded.
    #[error("line {line} (byte offset {offset}): {message}")]
    Malformed {
        line: u64,
        offset: u64,
        message: String,
    },

    #[error("duplicate record id: {0}")]
    DuplicateId(String),

    #[error("rules line {line}: {message}")]
    RulesSyntax { line: usize, message: String },

    #[error("template {template:?}: {message}")]
    Template { template: String, message: String },

    #[error("record {id}: missing {field}")]
    MissingField { id: String, field: &'static str },

    #[error("{0}")]
    InvalidInput(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: String,
        actual: String,
    },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
