use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument failed; `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    Domain { field: &'static str, reason: String },

    /// The requested truncation exceeds a configured size guard.
    #[error("size guard exceeded: {what} = {actual} > {limit}")]
    SizeGuard {
        what: &'static str,
        actual: String,
        limit: u64,
    },

    #[error("integer overflow computing {0}; use the big-integer variant")]
    Overflow(&'static str),

    #[error("branching generations not strictly increasing at n = {index}")]
    NotStrictlyIncreasing { index: usize },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
