use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{start}, {end}]: need finite 0 <= start < end")]
    InvalidInterval { start: f64, end: f64 },

    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),

    #[error("interval [{start}, {end}] lies outside a video of {duration} s")]
    OutOfVideo { start: f64, end: f64, duration: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid frame track: {0}")]
    InvalidFrameTrack(String),

    #[error("invalid embedding track: {0}")]
    InvalidEmbeddingTrack(String),

    #[error("vector at index {index} has norm {norm}, expected unit norm")]
    NotUnitNorm { index: usize, norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("encoder mismatch: expected `{expected}`, got `{actual}`")]
    EncoderMismatch { expected: String, actual: String },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("no caption covers segment [{start}, {end}] of video `{vid}`")]
    MissingCaption { vid: String, start: f64, end: f64 },

    #[error("moments are not sorted and non-overlapping: [{prev_start}, {prev_end}] then [{start}, {end}]")]
    Unordered { prev_start: f64, prev_end: f64, start: f64, end: f64 },

    #[error("segments do not form a partition: gap or overlap between {prev_end} and {start}")]
    NotPartition { prev_end: f64, start: f64 },

    #[error("prediction qid {pred} does not match ground-truth qid {gt}")]
    QidMismatch { pred: u64, gt: u64 },

    #[error("duplicate prediction record for qid {0}")]
    DuplicatePrediction(u64),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{path}: bad magic {found:?}, expected {expected:?}")]
    BadMagic { path: PathBuf, expected: [u8; 4], found: [u8; 4] },

    #[error("{path}: unsupported format version {version}")]
    UnsupportedVersion { path: PathBuf, version: u16 },

    #[error("{path}: truncated payload, expected {expected} bytes, found {actual}")]
    Truncated { path: PathBuf, expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by how the tool was invoked rather than by the data.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidArgument(_))
    }
}
