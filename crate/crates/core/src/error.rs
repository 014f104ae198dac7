use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation at the singular point x = 0 of the Green function")]
    SingularPoint,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coincident particles {i} and {j} (torus distance {dist:.3e})")]
    CoincidentPair { i: usize, j: usize, dist: f64 },

    #[error("pair ({i}, {j}) below the collision floor (torus distance {dist:.3e})")]
    CollisionFloor { i: usize, j: usize, dist: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("rate fit needs at least 3 distinct N, got {0}")]
    FitUnderdetermined(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 for configuration problems, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::DimensionMismatch { .. } | Error::Io(_) => 1,
            _ => 2,
        }
    }
}
