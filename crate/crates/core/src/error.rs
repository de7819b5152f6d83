use thiserror::Error;

/// Errors raised by the frame and weaving routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "exhaustive enumeration of {blocks}^{nodes} partitions exceeds budget {budget}; \
         use sampled or descent search instead"
    )]
    BudgetExceeded {
        blocks: usize,
        nodes: usize,
        budget: u64,
    },

    #[error("operator is not self-adjoint (asymmetry {asymmetry:.3e}, norm {norm:.3e})")]
    NotSelfAdjoint { asymmetry: f64, norm: f64 },

    #[error("field value at node {node} is not in its subspace (residual {residual:.3e})")]
    MembershipViolation { node: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, FrameError>;

pub(crate) fn invalid(msg: impl Into<String>) -> FrameError {
    FrameError::InvalidInput(msg.into())
}
