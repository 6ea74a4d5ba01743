use thiserror::Error;

/// Errors raised by the numerical and statistical routines.
///
/// Every variant names the routine (or query) that failed so the CLI can
/// print a message that points at the offending computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the routine.
    #[error("{routine}: domain error: {detail}")]
    Domain {
        routine: &'static str,
        detail: String,
    },

    /// An integral or series diverges for the requested arguments.
    #[error("{routine}: divergent: {detail}")]
    Divergence {
        routine: &'static str,
        detail: String,
    },

    /// A series or adaptive scheme ran out of budget before reaching tolerance.
    #[error("{routine}: did not converge: {detail}")]
    NonConvergence {
        routine: &'static str,
        detail: String,
    },

    /// A quantile model violates its construction invariants.
    #[error("invalid model `{model}`: {detail}")]
    InvalidModel { model: String, detail: String },

    /// A sample is unusable (too short, non-finite, unparsable).
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// A request is malformed independently of any numeric domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            routine,
            detail: detail.into(),
        }
    }

    pub(crate) fn divergence(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Divergence {
            routine,
            detail: detail.into(),
        }
    }

    pub(crate) fn non_convergence(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::NonConvergence {
            routine,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid_model(model: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvalidModel {
            model: model.into(),
            detail: detail.into(),
        }
    }

    /// True for failures of the numerics themselves (divergence, non-convergence),
    /// as opposed to bad input.
    pub fn is_computational(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::NonConvergence { .. })
    }
}
