use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not completely positive: minimum Choi eigenvalue {min_eigenvalue:.3e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("not a correlation matrix: {reason}")]
    NotCorrelationMatrix { reason: String },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("channel is not unital, completely positive and trace preserving")]
    NotUcpt,

    #[error("channel is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("channel is not unital (deviation {deviation:.3e})")]
    NotUnital { deviation: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid projection-valued measure: {0}")]
    InvalidPvm(String),

    #[error("PVMs do not commute at (x={x}, y={y}, a={a}, b={b}): commutator norm {norm:.3e}")]
    NonCommutingPvms {
        x: usize,
        y: usize,
        a: usize,
        b: usize,
        norm: f64,
    },

    #[error("invalid correlation table: {0}")]
    InvalidTable(String),

    #[error("problem too large: {0}")]
    SizeOverflow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn dim(expected: usize, got: usize) -> Self {
        Error::DimensionMismatch { expected, got }
    }
}
