use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown letter or generator `{0}`")]
    UnknownLetter(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration of {requested} words exceeds the budget of {limit}")]
    BudgetExceeded { requested: String, limit: u64 },

    #[error("step cap of {cap} exceeded")]
    StepCapExceeded { cap: u64 },

    #[error("word is not freely reduced but the universe only admits reduced words")]
    NotReduced,

    #[error("braid is not pure; strand forgetting is only defined on pure braids")]
    NotPure,

    #[error("presentation fails the metric small cancellation condition: max piece {max_piece}, shortest relator {min_relator}")]
    SmallCancellation { max_piece: usize, min_relator: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("homomorphism does not kill relator {0}")]
    NotAHomomorphism(String),

    #[error("exponential fit needs at least 3 positive residuals, got {0}")]
    TooFewResiduals(usize),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
