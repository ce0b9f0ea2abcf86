use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("duplicate card {0}")]
    DuplicateCard(crate::Card),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("illegal action: {0}")]
    IllegalAction(String),

    #[error("state is terminal")]
    Terminal,

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("empty batch")]
    EmptyBatch,

    #[error("empty buffer")]
    EmptyBuffer,

    #[error("checkpoint format: {0}")]
    Format(String),

    #[error("unsupported checkpoint version {found:?}, expected {expected:?}")]
    Version { found: String, expected: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
