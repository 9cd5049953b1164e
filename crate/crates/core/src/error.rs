use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent quantity: {0}")]
    Divergent(String),

    #[error("numerical failure in {what}: estimate {estimate:e} with error bound {abs_err:e}")]
    Numerical {
        what: String,
        estimate: f64,
        abs_err: f64,
    },

    #[error("regime incompatible with model: {0}")]
    Incompatible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn divergent(msg: impl Into<String>) -> Self {
        Error::Divergent(msg.into())
    }

    /// True for errors that stem from an invalid input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
