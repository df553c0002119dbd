use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unreadable image {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("image has a zero dimension ({width}x{height})")]
    ZeroDimension { width: u32, height: u32 },
    #[error("coincident points cannot define a reflection")]
    CoincidentPoints,
    #[error("pixel ({0}, {1}) is not an edge pixel")]
    NotAnEdgePixel(u32, u32),
    #[error("degenerate curve: repeated samples")]
    DegenerateCurve,
    #[error("curves have mismatched sample counts ({0} vs {1})")]
    SampleCountMismatch(usize, usize),
    #[error("need at least 2 edge pixels with valid curves, found {0}")]
    TooFewEdgePixels(usize),
    #[error("superpixel count {0} is below the minimum of 4")]
    TooFewSuperpixels(usize),
    #[error("degenerate cluster: summed pair differences vanish")]
    DegenerateCluster,
    #[error("f-score undefined when tp, fp and fn are all zero")]
    EmptyCounts,
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("image encoding error: {0}")]
    Image(#[from] image::ImageError),
    #[error("png encoding error: {0}")]
    Png(#[from] png::EncodingError),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
