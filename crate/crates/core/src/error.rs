use thiserror::Error;

use crate::oracle::OracleEstimate;

/// Errors produced by tensor construction, the bounds engine and the oracle.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape {shape:?} needs {expected} entries, found {found}")]
    ShapeDataMismatch {
        shape: Vec<usize>,
        expected: usize,
        found: usize,
    },

    #[error("entry {index} is not finite ({value})")]
    NonFiniteEntry { index: usize, value: f64 },

    #[error("shape must have at least one dimension and no zero dimensions, got {0:?}")]
    InvalidShape(Vec<usize>),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("mode {mode} is out of range for an order-{order} tensor (modes are 1..={order})")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("factor vector {0} is empty")]
    EmptyVector(usize),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("operation requires an order-3 tensor, got order {0}")]
    UnsupportedOrder(usize),

    #[error("operation is undefined for the zero tensor")]
    ZeroTensor,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "no restart reached the residual tolerance (best relative residual {:.3e})",
        .best.relative_residual
    )]
    DidNotConverge { best: Box<OracleEstimate> },
}

pub type Result<T> = std::result::Result<T, Error>;
