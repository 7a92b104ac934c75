use thiserror::Error;

/// Errors raised by state, channel, fidelity and oracle computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The input state is not pure enough for the closed-form fidelity.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported dimension: {0} modes")]
    UnsupportedDimension(usize),

    #[error("unsupported channel: {0}")]
    UnsupportedChannel(String),

    #[error("quadrature grid too large: {points} points (limit {limit})")]
    GridTooLarge { points: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
