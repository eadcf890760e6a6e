//! Internal block-split representation shared by the solver back ends.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused whenever std is linked into the build
use num_traits::Float;

use crate::symcore::{dot, eigen_sym, DenseMatrix, SymMatrix};

/// A point of the product cone: one dense symmetric matrix per psd block
/// plus the nonnegative scalars.
#[derive(Clone, Debug)]
pub(crate) struct Var {
    pub mats: Vec<DenseMatrix>,
    pub vec: Vec<f64>,
}

impl Var {
    pub fn scaled_identity(sizes: &[usize], q: usize, s: f64) -> Var {
        Var {
            mats: sizes
                .iter()
                .map(|&n| {
                    let mut m = DenseMatrix::identity(n);
                    for i in 0..n {
                        m[(i, i)] = s;
                    }
                    m
                })
                .collect(),
            vec: vec![s; q],
        }
    }

    pub fn zeros_like(other: &Var) -> Var {
        Var {
            mats: other.mats.iter().map(|m| DenseMatrix::zeros(m.rows(), m.cols())).collect(),
            vec: vec![0.0; other.vec.len()],
        }
    }

    pub fn inner(&self, other: &Var) -> f64 {
        let mut s = dot(&self.vec, &other.vec);
        for (a, b) in self.mats.iter().zip(&other.mats) {
            s += frob_inner(a, b);
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Var) {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    a[(i, j)] += s * b[(i, j)];
                }
            }
        }
        for (a, b) in self.vec.iter_mut().zip(&other.vec) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &Var) -> Var {
        let mut v = self.clone();
        v.axpy(-1.0, other);
        v
    }

    pub fn scale(&mut self, s: f64) {
        for m in &mut self.mats {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    m[(i, j)] *= s;
                }
            }
        }
        self.vec.iter_mut().for_each(|v| *v *= s);
    }

    pub fn symmetrize(&mut self) {
        for m in &mut self.mats {
            sym_in_place(m);
        }
    }

    /// Smallest eigenvalue over all blocks and scalars.
    pub fn min_eig(&self) -> f64 {
        let mut lo = f64::INFINITY;
        for m in &self.mats {
            if m.rows() > 0 {
                if let Ok(e) = eigen_sym(&SymMatrix::from_dense_sym(m)) {
                    lo = lo.min(e.min());
                } else {
                    return f64::NAN;
                }
            }
        }
        for &v in &self.vec {
            lo = lo.min(v);
        }
        lo
    }

    /// Largest eigenvalue over all blocks and scalars.
    pub fn max_eig(&self) -> f64 {
        let mut hi = f64::NEG_INFINITY;
        for m in &self.mats {
            if m.rows() > 0 {
                if let Ok(e) = eigen_sym(&SymMatrix::from_dense_sym(m)) {
                    hi = hi.max(e.max());
                } else {
                    return f64::NAN;
                }
            }
        }
        for &v in &self.vec {
            hi = hi.max(v);
        }
        hi
    }
}

pub(crate) fn frob_inner(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.rows() {
        s += dot(a.row(i), b.row(i));
    }
    s
}

pub(crate) fn sym_in_place(m: &mut DenseMatrix) {
    let n = m.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// One equality row `Σ_b ⟨A_b, X_b⟩ + gᵀu = b`. Blocks where the row
/// vanishes are `None`.
#[derive(Clone, Debug)]
pub(crate) struct Row {
    pub blocks: Vec<Option<DenseMatrix>>,
    pub g: Vec<f64>,
}

/// Constraint data in block-split form.
#[derive(Clone, Debug)]
pub(crate) struct BlockedData {
    pub sizes: Vec<usize>,
    pub q: usize,
    pub c: Var,
    pub rows: Vec<Row>,
    pub b: Vec<f64>,
}

impl BlockedData {
    pub fn apply(&self, x: &Var) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                let mut s = dot(&r.g, &x.vec);
                for (a, xm) in r.blocks.iter().zip(&x.mats) {
                    if let Some(a) = a {
                        s += frob_inner(a, xm);
                    }
                }
                s
            })
            .collect()
    }

    /// Inner products of every row with a (possibly nonsymmetric) block
    /// matrix set and vector.
    pub fn apply_general(&self, mats: &[DenseMatrix], v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                let mut s = dot(&r.g, v);
                for (a, xm) in r.blocks.iter().zip(mats) {
                    if let Some(a) = a {
                        s += frob_inner(a, xm);
                    }
                }
                s
            })
            .collect()
    }

    pub fn apply_t(&self, y: &[f64]) -> Var {
        let mut out = Var {
            mats: self.sizes.iter().map(|&n| DenseMatrix::zeros(n, n)).collect(),
            vec: vec![0.0; self.q],
        };
        for (r, &yi) in self.rows.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (a, o) in r.blocks.iter().zip(out.mats.iter_mut()) {
                if let Some(a) = a {
                    for i in 0..a.rows() {
                        for j in 0..a.cols() {
                            o[(i, j)] += yi * a[(i, j)];
                        }
                    }
                }
            }
            for (o, g) in out.vec.iter_mut().zip(&r.g) {
                *o += yi * g;
            }
        }
        out
    }
}
