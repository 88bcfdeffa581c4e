use thiserror::Error;

/// Errors produced by grid, kernel, and solver operations.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: left has n={left}, right has n={right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("grid spec mismatch between operands")]
    SpecMismatch,

    #[error("invalid grid spec: {0}")]
    InvalidGrid(String),

    #[error("dilation factor must be positive, got {0}")]
    NonpositiveDilation(f64),

    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error("fractional order must lie in (0,1), got {0}")]
    InvalidOrder(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("norms underflow; the field has left the box, use a larger box")]
    BoxTooSmall,

    #[error("history budget exceeded: need {needed} bytes, cap is {cap} bytes")]
    HistoryBudget { needed: usize, cap: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad dump file: {0}")]
    BadDump(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
