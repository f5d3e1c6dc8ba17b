use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function has a pole at {0}")]
    Pole(f64),

    #[error("gamma function overflows at {0}")]
    Overflow(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("divergent quantity: {0}")]
    Divergence(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("survival bounded order fails at t = {worst_t} (gap {worst_gap:e})")]
    OrderViolation { worst_t: f64, worst_gap: f64 },

    #[error("distribution has no absolutely continuous density: {0}")]
    MissingDensity(String),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures that come from the numerics rather than from the
    /// mathematical inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_) | Error::Overflow(_))
    }
}
