use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An iterative or adaptive procedure did not reach its tolerance.
    #[error("no convergence in {context}: {detail}")]
    NonConvergence {
        context: &'static str,
        detail: String,
    },
    /// The request lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn no_convergence(context: &'static str, detail: impl Into<String>) -> Self {
        Error::NonConvergence {
            context,
            detail: detail.into(),
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
