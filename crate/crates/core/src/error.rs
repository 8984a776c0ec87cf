use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: every subsystem needs at least 2 levels")]
    InvalidDimension(usize),

    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("incompatible Hilbert spaces: {0}")]
    IncompatibleSpaces(String),

    #[error("degenerate detuning: 2*Omega equals Delta, eta = 0")]
    DegenerateDetuning,

    #[error("truncation too small: top-level population {leak:.3e} exceeds {limit:.1e}")]
    NeedsLargerSpace { leak: f64, limit: f64 },

    #[error("norm drift {drift:.3e} exceeds tolerance {tol:.1e}; reduce the step size")]
    StepSizeTooLarge { drift: f64, tol: f64 },

    #[error("density matrix of dimension {dim} exceeds the dense cap {cap}; use the trajectory solver")]
    DensityTooLarge { dim: usize, cap: usize },

    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    #[error("invalid variance {0}: must be positive")]
    InvalidVariance(f64),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
