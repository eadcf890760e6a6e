use alloc::string::String;

use crate::sdpsolve::SolveStatus;
use crate::symcore::BlockIndexSet;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("block index {index} out of range for {blocks} blocks")]
    BlockIndexOutOfRange { index: usize, blocks: usize },

    #[error("matrix {matrix} has an entry at ({row}, {col}) outside the declared blocks")]
    NotBlockDiagonal { matrix: usize, row: usize, col: usize },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("conic solver returned {status:?} after {iterations} iterations")]
    Solver { status: SolveStatus, iterations: usize },

    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("system is not weakly infeasible")]
    NotInfeasible,

    #[error("extreme point has block support {found}, expected {expected}")]
    SupportMismatch { expected: BlockIndexSet, found: BlockIndexSet },

    #[error("guard violated: {0}")]
    Guard(String),
}

pub type Result<T> = core::result::Result<T, Error>;
