use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("set index {index} out of range for a registry of {len} sets")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    /// The oracle grid contains no point satisfying the feasibility test.
    #[error("no feasible grid point")]
    EmptyFeasible,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
