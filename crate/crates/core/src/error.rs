use thiserror::Error;

/// Errors raised across the simulation and analysis stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("layout mismatch: expected dimension {expected}, got {found}")]
    LayoutMismatch { expected: usize, found: usize },

    #[error("factor index {index} out of range for layout with {factors} factors")]
    FactorOutOfRange { index: usize, factors: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing motional mode: {0}")]
    MissingMode(&'static str),

    #[error("integration failed at t = {time:.6e} s: {reason}")]
    Integration { time: f64, reason: String },

    #[error("problem too large for exact propagation (dimension {0}, limit 64)")]
    TooLarge(usize),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
