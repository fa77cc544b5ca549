use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("tridiagonal pivot {index} has magnitude {magnitude:e}")]
    SingularPivot { index: usize, magnitude: f64 },
    #[error(
        "fixed-point iteration did not converge at t = {time} after {iterations} iterations \
         (last relative change {residual:e}); reduce dt"
    )]
    FixedPointDiverged {
        time: f64,
        iterations: usize,
        residual: f64,
    },
    #[error("trajectory has {got} observations, at least {needed} are required")]
    TooFewObservations { needed: usize, got: usize },
    #[error("operation requires a nonzero field")]
    ZeroField,
    #[error("{0}")]
    OutOfRegime(String),
}

pub type Result<T> = std::result::Result<T, Error>;
