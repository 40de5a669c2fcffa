use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A document could not be decoded or read.
    #[error("ingestion error in document `{doc_id}`: {reason}")]
    Ingestion { doc_id: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// A caller passed an argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input data (poll values, scores, CSV rows) is out of range or malformed.
    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
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

    /// Whether the error stems from user input rather than a defect.
    pub fn is_user_error(&self) -> bool {
        match self {
            Error::Json(e) => !matches!(e.classify(), serde_json::error::Category::Io),
            _ => true,
        }
    }
}
