use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The caller violated a precondition (bad lengths, infeasible parameters, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// The instance is too large for an exhaustive routine.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Random graph generation ran out of retries.
    #[error("generation failed: {0}")]
    Generation(String),
    /// A text file or string did not match the expected format.
    #[error("parse error: {0}")]
    Parse(String),
    /// The deterministic search would exceed its branch budget.
    #[error("branch budget exceeded: {required} branch-steps needed, budget is {budget}")]
    Budget { required: u128, budget: u128 },
    /// An internal consistency check failed; this is a bug.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
