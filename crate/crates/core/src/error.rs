use alloc::string::String;

/// Errors raised by the computational kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0} is not an odd prime")]
    NotPrime(u64),

    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),

    #[error("budget exceeded for {what}: need {required}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    #[error("precision exhausted in {what}: accumulator {value} is {distance} away from an integer")]
    PrecisionExhausted {
        what: &'static str,
        value: f64,
        distance: f64,
    },

    #[error("direction is not a normalized integer vector; exact mode unavailable")]
    NonRationalDirection,

    #[error("outside the admissible regime: {0}")]
    RegimeViolation(String),

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("cannot certify: {0}")]
    Uncertifiable(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn budget(what: &'static str, required: u128, limit: u128) -> Self {
        Error::BudgetExceeded {
            what,
            required,
            limit,
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
