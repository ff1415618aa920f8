//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed input file; `offset` is the byte position where parsing failed.
    #[error("format error in {path} at byte {offset}: {message}")]
    Format {
        path: String,
        offset: u64,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("training failed at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incompatible file: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
