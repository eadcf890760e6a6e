//! Symmetric-matrix arithmetic, eigendecomposition and block bookkeeping.

mod eigen;
pub mod linalg;
mod matrix;
mod partition;

pub use eigen::{eigen_sym, min_eigenvalue, operator_norm, project_psd, psd_check, EigenDecomposition};
pub use matrix::{dot, norm2, DenseMatrix, SymMatrix};
pub(crate) use partition::first_off_block_entry;
pub use partition::{block_support, extract_block, is_block_diagonal, BlockIndexSet, BlockPartition};

use crate::error::{Error, Result};

/// `⟨A, B⟩ = tr(AᵀB)`.
pub fn inner_product(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(a.dot(b))
}

/// Default relative zero/psd tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
