use std::io;

/// Errors raised by the carving, forgery, metric and dataset routines.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("unsupported image container{0}")]
    UnsupportedContainer(String),

    #[error("corrupt or undecodable image stream: {0}")]
    CorruptStream(String),

    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),

    #[error("unsupported sample format: {0}")]
    UnsupportedSampleFormat(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("region {0} lies outside the image")]
    OutOfBounds(String),

    #[error("invalid seam: {0}")]
    InvalidSeam(String),

    #[error("image too small for this operation: {0}")]
    Degenerate(String),

    #[error("removal and protective masks overlap at {count} pixel(s)")]
    MaskOverlap { count: usize },

    #[error("forward energy mode requires forward costs (and only forward mode accepts them)")]
    ForwardCostsMismatch,

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("pixel ({row}, {col}) has a color outside the seam mask palette")]
    InvalidMaskColor { row: usize, col: usize },

    #[error("inconsistent provenance: {0}")]
    InconsistentProvenance(String),

    #[error("encoder failure: {0}")]
    Encode(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: (usize, usize), found: (usize, usize)) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}
