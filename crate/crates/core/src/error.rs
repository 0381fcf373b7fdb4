use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid length {0} is not a positive power of two")]
    NotPowerOfTwo(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("negative Sobolev power {power} requires a zero-mean input (mean mode {mean:e})")]
    NonZeroMean { power: f64, mean: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate geometry at s = {s:.6}, alpha = {alpha:.6}: {reason}")]
    Geometry { s: f64, alpha: f64, reason: String },
    #[error("curve violates the chord-arc condition (constant {constant:e} below {threshold:e})")]
    ChordArc { constant: f64, threshold: f64 },
    #[error("time step {dt} exceeds the explicit RK4 stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("solution became non-finite at t = {t}")]
    Blowup { t: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
