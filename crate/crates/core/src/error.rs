//! Error type shared by the numerical modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("matrix is singular (condition number out of range)")]
    SingularMatrix,
    #[error("matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("sketch needs {requested} rows but only {available} are available")]
    NotEnoughRows { requested: usize, available: usize },
    #[error("subsample size {m} is outside 1..={n}")]
    BadSubsampleSize { m: usize, n: usize },
    #[error("isometry hypotheses violated: eps1 = {eps1}, eps2 = {eps2}")]
    HypothesisViolated { eps1: f64, eps2: f64 },
    #[error("search direction is numerically zero")]
    ZeroDirection,
    #[error("empty input")]
    EmptyInput,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    /// The underlying error with any iteration context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { context, expected, got })
    }
}
