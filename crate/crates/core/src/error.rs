use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("wavefunction has zero norm")]
    ZeroNorm,

    #[error(
        "node-dominated input: {below} of {considered} points inside the support fall below the density floor"
    )]
    NodeDominated { below: usize, considered: usize },

    #[error("position {x} outside the grid domain [{min}, {max}]")]
    OutOfDomain { x: f64, min: f64, max: f64 },

    #[error("non-finite gradient {gradient} at x = {x} (step {step})")]
    NonFiniteGradient { step: usize, x: f64, gradient: f64 },

    #[error("grid [{x_min}, {x_max}] does not span the packet interval [{lo}, {hi}]")]
    GridTooNarrow { x_min: f64, x_max: f64, lo: f64, hi: f64 },

    #[error("propagation failed at step {step}: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("disruptor callback failed: {0}")]
    Callback(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
