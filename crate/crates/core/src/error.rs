use num_bigint::BigUint;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("distribution is empty")]
    Empty,
    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: String },
    #[error("weights sum to {sum}, not 1")]
    NotNormalized { sum: String },
    #[error("dimension mismatch: expected {expected} outcomes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{what} requires {count} items, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        count: BigUint,
        cap: u64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("validity assignment has no valid branch")]
    EmptyAssignment,
    #[error("invalid validity assignment: {0}")]
    InvalidAssignment(String),
    #[error("distributions give identical Born targets; no contradiction can be derived")]
    SameDistribution,
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("branching rule is undefined on basis tuple {0}")]
    UndefinedOnBasis(String),
    #[error("invalid tensor state: {0}")]
    InvalidState(String),
    #[error("branching rule maps two inputs onto {0}")]
    NotInjective(String),
    #[error("outcome {outcome}: expected count {expected} is below 5")]
    ExpectedCountTooSmall { outcome: usize, expected: String },
    #[error("outcome index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("search exceeded the node budget of {0}")]
    SearchBudgetExceeded(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
