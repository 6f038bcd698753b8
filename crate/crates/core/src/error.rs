use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unbounded problem")]
    Unbounded,

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("point is not a member of the set (residual {residual:e})")]
    NotMember { residual: f64 },

    #[error("cone representation exceeds ray cap ({rays} > {cap})")]
    RepresentationBlowup { rays: usize, cap: usize },

    #[error("inconsistent cone representation: {0}")]
    InconsistentCone(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("sampling budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
