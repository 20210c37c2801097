use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A model or run parameter violates its admissibility constraints.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// An iterative numerical method did not meet its tolerance within budget.
    #[error("numeric failure: {message} (best estimate {estimate:e}, error bound {error_bound:e})")]
    Numeric {
        message: String,
        estimate: f64,
        error_bound: f64,
    },
    /// A ratio whose denominator vanishes identically.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by the caller's inputs rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Parameter(_) | Error::UndefinedRatio(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
