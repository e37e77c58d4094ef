use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("degenerate operator basis (Gram condition number {0:e})")]
    DegenerateBasis(f64),

    #[error("dimension {dim} exceeds capacity {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("protocol result carries no battery ledger")]
    MissingLedger,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical routine failed: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
