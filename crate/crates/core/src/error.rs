use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdmError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coordinate map is not bijective: {0}")]
    NonBijective(String),

    #[error("potential is not confining: {0}")]
    NonConfining(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("integration domain too small: {0}")]
    InsufficientDomain(String),

    #[error("truncation order {given} too small, need at least {required}")]
    TruncationTooSmall { given: usize, required: usize },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl PdmError {
    /// True for errors caused by a solver failing to converge, as opposed to bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            PdmError::Convergence(_) | PdmError::InsufficientDomain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, PdmError>;
