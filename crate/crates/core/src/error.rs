use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    // container format
    #[error("bad magic: expected \"PEMB\", found {found:?}")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported container version {0} (expected 1)")]
    VersionMismatch(u32),
    #[error("unsupported dtype code {0} (expected 1 = f32)")]
    UnsupportedDtype(u32),
    #[error("truncated container: expected {expected} payload bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("trailing bytes after payload: {0}")]
    TrailingBytes(u64),
    #[error("dimension overflow: {rows} x {cols} does not fit in memory")]
    DimensionOverflow { rows: u64, cols: u64 },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row {row} is not unit-norm (norm {norm}) although the container is flagged normalized")]
    NotNormalized { row: usize, norm: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),

    // text formats
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate id {id:?} on lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("invalid json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid image {path}: {message}")]
    Image { path: PathBuf, message: String },

    // domain
    #[error("invalid grid metadata: {0}")]
    GridMeta(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("regions {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("zero vector: cosine similarity is undefined")]
    ZeroVector,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty histogram")]
    EmptyHistogram,
    #[error("seed cell ({0}, {1}) is not set in the mask")]
    SeedNotSet(usize, usize),
    #[error("missing ground truth: {0}")]
    MissingGroundTruth(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
