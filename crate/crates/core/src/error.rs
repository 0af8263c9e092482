use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument {0} is within the pole-exclusion radius of a pole")]
    PoleProximity(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("integrand is not integrable: {0}")]
    NotIntegrable(String),
    #[error("{what} did not converge (estimate {estimate:e}, error bound {error:e})")]
    NonConvergence {
        what: String,
        estimate: f64,
        error: f64,
    },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
