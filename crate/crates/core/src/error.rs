use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A validated type (density matrix, projector, ...) failed one of its invariants.
    #[error("invariant violated ({invariant}): {detail}")]
    Invariant {
        invariant: &'static str,
        detail: String,
    },

    #[error("post-selection impossible: Tr(post * pre) = {0:e}")]
    PostSelectionImpossible(f64),

    #[error("weak-value factorization undefined: Tr(rho * pi_1) = {0:e}")]
    FactorizationUndefined(f64),

    #[error("eigen-solver failed to converge after {0} sweeps")]
    NonConvergence(usize),

    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PostSelectionImpossible(_)
                | Error::FactorizationUndefined(_)
                | Error::NonConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
