use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated input: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("oversized input: expected {expected} bytes, got {actual}")]
    Oversize { expected: usize, actual: usize },
    #[error("label count {labels} does not match image count {images}")]
    LabelMismatch { images: usize, labels: usize },
    #[error("insufficient images: need {needed}, only {available} available")]
    InsufficientImages { needed: usize, available: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("pattern count {requested} out of range 1..={available}")]
    KOutOfRange { requested: usize, available: usize },
    #[error("eigenvector row {0} is identically zero and cannot be normalized")]
    ZeroPattern(usize),
    #[error("coefficient count {requested} out of range 1..={available}")]
    COutOfRange { requested: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("measurement does not belong to this basis: {0}")]
    BasisMismatch(String),
    #[error("measurement does not belong to this Fourier plan: {0}")]
    PlanMismatch(String),
    #[error("degenerate truncation bounds: lo={lo}, hi={hi}")]
    DegenerateBounds { lo: f64, hi: f64 },

    #[error("invalid basis file: {0}")]
    BasisFormat(String),
    #[error("invalid PGM: {0}")]
    Pgm(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
