use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("grid mismatch: expected {expected} nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("exponent overflow in forward map: max exponent {max_exponent:.3} exceeds {limit}")]
    Overflow { max_exponent: f64, limit: f64 },

    #[error(
        "spectral truncation loses {lost_fraction:.3e} of the squared norm (limit {limit:.1e}); \
         the positive-order norm is unreliable"
    )]
    TailEnergy { lost_fraction: f64, limit: f64 },

    #[error("degenerate fit: {usable} usable coefficients, need at least {needed}")]
    DegenerateFit { usable: usize, needed: usize },

    #[error("empty reconstruction path")]
    EmptyPath,

    #[error("path too short: need at least {needed} reconstructions, got {got}")]
    ShortPath { needed: usize, got: usize },

    #[error(
        "residual target unreachable: smallest residual {min_residual:.6e} exceeds target {target:.6e}"
    )]
    InfeasibleDiscrepancy { min_residual: f64, target: f64 },

    #[error("non-positive sample passed to log-log regression")]
    NonPositiveSample,

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
