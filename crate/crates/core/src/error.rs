use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The valuation matrix is malformed or too large for 64-bit arithmetic.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// An allocation does not fit the instance it is evaluated against.
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    /// Agent or item index out of range.
    #[error("{kind} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        limit: usize,
    },

    /// The operation does not accept the supplied arguments
    /// (e.g. `NONE` passed to a fairness check, or `n != 2` for the two-agent path).
    #[error("usage: {0}")]
    Usage(String),

    /// Generator payload violates the bounds of the reduction it feeds.
    #[error("invalid payload: {0}")]
    InvalidPayload(String),

    #[error("enumeration needs {needed} allocations but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("solve exceeded its deadline")]
    Timeout,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by resource limits rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::Timeout)
    }
}
