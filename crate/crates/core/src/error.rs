use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the rehearsal pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Bad magic or unsupported version in a binary file.
    #[error("format error: {0}")]
    Format(String),

    /// Payload shorter (or longer) than its header promises.
    #[error("length error: {0}")]
    Length(String),

    /// Well-formed input carrying unusable values (NaN, Inf, wrong width).
    #[error("data error: {0}")]
    Data(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric error in layer {layer}: {message}")]
    Numeric { layer: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("division error: {0}")]
    Division(String),

    /// Records that should refer to the same dataset or run do not.
    #[error("join error: {0}")]
    Join(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
