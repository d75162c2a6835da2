use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("invalid {field} = {value}: {reason}")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Two parameter sets that must share physical constants do not.
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),

    /// A closed form produced NaN/inf or a non-negligible imaginary part.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    /// A slice does not match the number of coordinates of its target.
    #[error("slice/target arity mismatch: {0}")]
    Arity(String),

    /// Quadrature window too narrow for the integrand.
    #[error("quadrature truncation: integrand at the window edge is {ratio:e} of its maximum")]
    Truncation { ratio: f64 },
}

impl Error {
    pub(crate) fn domain(field: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            field,
            value,
            reason,
        }
    }
}
