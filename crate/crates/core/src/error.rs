use std::path::PathBuf;

/// Errors raised across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed image file: {0}")]
    Format(String),

    #[error("unsupported depth: {0}")]
    UnsupportedDepth(String),

    #[error("watermark must be square, got {width}x{height}")]
    NonSquareWatermark { width: usize, height: usize },

    #[error("expected {expected} encoding, got {actual}")]
    EncodingMismatch { expected: &'static str, actual: &'static str },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("order {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("no Hadamard order available for block side {0}")]
    NoOrder(usize),

    #[error("normalized correlation is undefined for an all-zero operand")]
    UndefinedNc,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed key: {0}")]
    Key(String),

    #[error("unsupported key version {0}")]
    KeyVersion(u64),

    #[error("jpeg codec failure: {0}")]
    Jpeg(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
