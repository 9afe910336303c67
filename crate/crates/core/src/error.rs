use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("truncation loss {loss:.3e} exceeds tolerance {tolerance:.1e} ({context})")]
    TruncationExceeded {
        loss: f64,
        tolerance: f64,
        context: String,
    },

    #[error("lock failure: |phase error| stayed above {threshold} rad from step {step}")]
    LockFailure { step: usize, threshold: f64 },

    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("calibration failure: {0}")]
    CalibrationFailure(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("incompatible slopes: {sui:.4} vs {mzi:.4}")]
    IncompatibleSlopes { sui: f64, mzi: f64 },

    #[error("malformed table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
