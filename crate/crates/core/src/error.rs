use thiserror::Error;

/// Errors raised by the analysis routines.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// computation ran on.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {x} is outside the domain [0, +inf)")]
    Domain { x: f64 },
    #[error("invalid regulation function: {0}")]
    InvalidRegulation(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid interval [{lo}, {hi}]: {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: String },
    #[error("derivative vanishes at x = {x}; Schwarzian undefined")]
    Singular { x: f64 },
    #[error("fixed point bisection stalled near t = {t} with residual {residual}")]
    ConvergenceFailure { t: f64, residual: f64 },
    #[error("found {count} fixed points; at most three are possible under the convexity hypotheses")]
    SuspectCount { count: usize },
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("integration exceeded {max_steps} steps")]
    StepLimit { max_steps: usize },
    #[error("invalid dimension {0}; at least 2 required")]
    InvalidDimension(usize),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
