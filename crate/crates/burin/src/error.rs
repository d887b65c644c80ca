use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the engraving library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Decode or encode failure, or a format this library does not handle.
    #[error("image error: {0}")]
    Image(String),

    /// Landmark file does not match the expected schema.
    #[error("landmark error: {0}")]
    Landmarks(String),

    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Two inputs that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    /// Degenerate geometry (collinear hull, coincident points, empty mask).
    #[error("degenerate geometry: {0}")]
    Geometry(String),

    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
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
