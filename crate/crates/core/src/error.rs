//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A symbol outside the accepted plate alphabet (letters, digits,
    /// spaces, hyphens) was found while normalizing raw text.
    #[error("invalid character {0:?} in plate text")]
    InvalidCharacter(char),

    /// A plate string whose normalized length falls outside 6..=11.
    #[error("plate length {0} outside the legal range 6..=11")]
    BadLength(usize),

    /// A character does not belong to the class its slot demands.
    #[error("character class mismatch at position {0}")]
    ClassMismatch(usize),

    /// Netpbm input does not start with a supported binary magic (P5/P6).
    #[error("unsupported or missing netpbm magic")]
    BadMagic,

    /// Netpbm header or pixel payload ended early or is malformed.
    #[error("truncated or malformed netpbm data")]
    TruncatedData,

    /// Netpbm maxval other than 255.
    #[error("unsupported netpbm maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),

    /// A box does not fit inside the image it refers to.
    #[error("box out of image bounds")]
    OutOfBounds,

    /// The image is too small for the requested operation.
    #[error("image too small for this operation")]
    TooSmall,

    /// Frame rate below the minimum of 2 needed for stride sampling.
    #[error("fps {0} below the minimum of 2")]
    BadFps(u32),

    /// Segmentation found no usable glyph components.
    #[error("no glyphs found")]
    NoGlyphs,

    /// A glyph bitmap without any ink cannot be classified.
    #[error("glyph contains no ink")]
    BlankGlyph,

    /// A scene description violates its own invariants.
    #[error("invalid scene spec: {0}")]
    SpecInvalid(String),

    /// Filesystem failure while reading or writing pipeline artifacts.
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A detection-store line that does not parse as a detection record.
    #[error("malformed store record at line {0}")]
    MalformedRecord(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
