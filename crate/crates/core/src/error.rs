use thiserror::Error;

/// Errors raised by the sphere arithmetic, the series engine and the
/// statistics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid point: homogeneous coordinates ({0}) are degenerate")]
    InvalidPoint(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("indeterminate evaluation: both homogeneous forms vanish at {0}")]
    Indeterminate(String),
    #[error("chart error: {0}")]
    Chart(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series is not expandable at 0: {0}")]
    NotExpandable(String),
    #[error("series order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("multiplier {0} is outside the Koenigs regime (|a1| must avoid 0 and 1)")]
    NotKoenigs(f64),
    #[error("finite-time exponent undefined before the first step")]
    NoSteps,
    #[error("observer failed at step {step}: {message}")]
    Observer { step: u64, message: String },
    #[error("degenerate start point {0}: its orbit never leaves the distinguished set")]
    DegenerateStart(String),
    #[error("undefined tail: {0}")]
    UndefinedTail(String),
    #[error("truncation disagreement {0:e} exceeds tolerance; reduce the probe scale")]
    ScaleTooLarge(f64),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
