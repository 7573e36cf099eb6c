//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by corpus construction, training, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at {path}:{line}: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("sql dump parse error at byte {offset}: {message}")]
    SqlParse { offset: u64, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("model version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("checksum mismatch in {path}")]
    Corrupt { path: PathBuf },

    #[error("training diverged: {0}")]
    Training(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
