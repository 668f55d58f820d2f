use thiserror::Error;

/// Errors raised by the numerics, models and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("series did not converge after {terms} terms (|z| = {z})")]
    NonConvergence { terms: usize, z: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular input gain: |b| = {0} below 1e-9")]
    SingularGain(f64),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
