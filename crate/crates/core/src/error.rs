use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("zero or non-finite pivot at row {row}")]
    ZeroPivot { row: usize },

    #[error("non-finite value at row {row}")]
    NonFinite { row: usize },

    #[error("no convergence after {iterations} iterations (last update {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no feasible active set found for a problem of size {size}")]
    NoFeasibleActiveSet { size: usize },

    #[error("problem of size {size} exceeds the enumeration bound of {max}")]
    TooLarge { size: usize, max: usize },

    #[error("spot {spot} outside grid range [{lo}, {hi}]")]
    SpotOutOfRange { spot: f64, lo: f64, hi: f64 },

    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
