use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("{0}")]
    InvalidInput(String),

    #[error("bad magic")]
    BadMagic,

    #[error("unsupported version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("non-finite payload value at index {0}")]
    NonFinite(usize),

    #[error("degenerate range [{min}, {max}]")]
    DegenerateRange { min: f64, max: f64 },

    #[error("duplicate entry id {0:?}")]
    DuplicateEntryId(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("incomplete grid: expected {expected} cells, got {actual}")]
    IncompleteGrid { expected: usize, actual: usize },

    #[error("irregular {axis} spacing")]
    IrregularSpacing { axis: &'static str },

    #[error("duplicate coordinate ({lat}, {lon})")]
    DuplicateCoordinate { lat: f64, lon: f64 },

    #[error("field {width}x{height} smaller than patch size {size}")]
    FieldTooSmall {
        width: usize,
        height: usize,
        size: usize,
    },

    #[error("zero-variance reference")]
    ZeroVarianceReference,

    #[error("zero sill")]
    ZeroSill,

    #[error("zero energy at wavenumber {0}")]
    ZeroEnergy(usize),

    #[error("mismatched grids: {0}")]
    MismatchedGrids(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}: {error}")]
    Io {
        path: PathBuf,
        error: std::io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, error: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            error,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
