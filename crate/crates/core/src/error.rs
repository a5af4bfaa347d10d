use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] io::Error),

    #[error("malformed XML in {document} at byte {offset}: {message}")]
    Xml {
        document: String,
        offset: usize,
        message: String,
    },

    #[error("feature `{feature}` has no entry in the featural preposition map ({document})")]
    UnmappedFeature { feature: String, document: String },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("token `{0}` is out of vocabulary")]
    Oov(String),

    #[error("input is degenerate: {0}")]
    Degenerate(String),

    #[error("rank-deficient input: effective rank {rank} is below the {requested} requested components")]
    RankDeficient { rank: usize, requested: usize },

    #[error("training diverged: {0}")]
    NonFinite(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// True for errors caused by bad inputs or configuration rather than by a
    /// failure while computing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Io { .. }
                | Error::Xml { .. }
                | Error::UnmappedFeature { .. }
                | Error::Parse { .. }
                | Error::Format(_)
                | Error::Unsupported(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
