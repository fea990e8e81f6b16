use thiserror::Error;

/// Failures raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A discrete supremum was attained on the boundary of the sampled domain,
    /// so the tabulated value would be unreliable.
    #[error("sampling domain too small: supremum for dual point {dual} lies outside [0, {domain_end}]")]
    DomainTooSmall { dual: f64, domain_end: f64 },

    /// A sublevel set reached the boundary of the tabulation box.
    #[error("tabulation box too small: radius {requested} requested, sublevel sets are only contained up to {valid}")]
    BoxTooSmall { requested: f64, valid: f64 },

    #[error("Φ(s)/s does not vanish as s → 0⁺ (limit estimate {limit})")]
    NonIntegrableAtZero { limit: f64 },

    #[error("∫₀ (s/Φ(s))^(1/(N-1)) ds diverges at 0 (local exponent {local_exponent})")]
    DivergentAtZero { local_exponent: f64 },

    #[error("value {value} outside the invertible range [0, {max}]")]
    OutOfRange { value: f64, max: f64 },

    #[error("ranges do not overlap: {0}")]
    RangeMismatch(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
