use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: file not found", path.display())]
    NotFound { path: PathBuf },

    #[error("{}: unsupported image format: {reason}", path.display())]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{}: truncated payload, expected {expected} bytes but found {found}", path.display())]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("pad target {target:?} is smaller than the image {source_dims:?}")]
    PadTarget {
        target: (usize, usize),
        source_dims: (usize, usize),
    },

    #[error("mask valid region is not a rectangle anchored at the origin")]
    InvalidMask,

    #[error("image {dims:?} is smaller than the {what} ({size} px)")]
    TooSmall {
        dims: (usize, usize),
        what: &'static str,
        size: usize,
    },

    #[error("noise intensity must be non-negative, got {0}")]
    NegativeSigma(f64),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("pixel ({row}, {col}) received no patch contribution")]
    Uncovered { row: usize, col: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        let path = path.into();
        if source.kind() == io::ErrorKind::NotFound {
            Error::NotFound { path }
        } else {
            Error::Io { path, source }
        }
    }
}
