use alloc::vec::Vec;

#[allow(unused_imports)] // unused whenever std is linked into the build
use num_traits::Float;

use super::matrix::{DenseMatrix, SymMatrix};
use crate::error::{Error, Result};

/// Sweep stops once the off-diagonal Frobenius mass falls below this
/// fraction of the full Frobenius norm.
const OFF_DIAGONAL_THRESHOLD: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl EigenDecomposition {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `max |λ|`.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `Q diag(f(λ)) Qᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let mut out = SymMatrix::zeros(n);
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for (k, &l) in fl.iter().enumerate() {
                    if l != 0.0 {
                        s += self.vectors[(i, k)] * l * self.vectors[(j, k)];
                    }
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn eigen_sym(a: &SymMatrix) -> Result<EigenDecomposition> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.dim();
    let mut m = a.to_dense();
    let mut v = DenseMatrix::identity(n);
    let total = a.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= OFF_DIAGONAL_THRESHOLD * total || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // skip rotations that cannot change the diagonal in floating point
                if apq.abs() < 1e-300 || (apq.abs() * 1e18 < app.abs() && apq.abs() * 1e18 < aqq.abs())
                {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = v.select_columns(&order);
    Ok(EigenDecomposition { values, vectors })
}

/// Operator norm `max |λ_j|`.
pub fn operator_norm(a: &SymMatrix) -> Result<f64> {
    Ok(eigen_sym(a)?.spectral_radius())
}

pub fn min_eigenvalue(a: &SymMatrix) -> Result<f64> {
    if a.dim() == 0 {
        return Ok(0.0);
    }
    Ok(eigen_sym(a)?.min())
}

/// `λ_min(a) ≥ −tol·(1 + ‖a‖₂)`.
pub fn psd_check(a: &SymMatrix, tol: f64) -> Result<bool> {
    if a.dim() == 0 {
        return Ok(true);
    }
    let e = eigen_sym(a)?;
    Ok(e.min() >= -tol * (1.0 + e.spectral_radius()))
}

/// Euclidean projection onto the psd cone (eigenvalue clipping).
pub fn project_psd(a: &SymMatrix) -> Result<SymMatrix> {
    if a.dim() == 0 {
        return Ok(a.clone());
    }
    Ok(eigen_sym(a)?.reconstruct_with(|l| l.max(0.0)))
}
