use thiserror::Error;

/// Errors shared by all analysis operations.
///
/// `Domain` marks invalid inputs (violated invariants, preconditions).
/// `Degenerate` marks analyses whose nondegeneracy condition failed; the
/// input was valid but the requested conclusion cannot be drawn.
/// `Infeasible` marks critical parameter values that exist algebraically
/// but violate parameter positivity. `Escape` marks trajectories leaving
/// the domain of the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0}")]
    Domain(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("escape: {0}")]
    Escape(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
    pub fn escape(msg: impl Into<String>) -> Self {
        Error::Escape(msg.into())
    }
}
