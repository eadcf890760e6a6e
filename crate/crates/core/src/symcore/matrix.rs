use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

#[allow(unused_imports)] // unused whenever std is linked into the build
use num_traits::Float;

use crate::error::{Error, Result};

/// Dense real symmetric matrix. Only the upper triangle is stored, so
/// `m[(i, j)] == m[(j, i)]` holds by construction.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i - 1) / 2 + j
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from a row-major slice of rows. The input must be
    /// square and symmetric to within `1e-12` relative.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                let w = rows[j][i];
                if (v - w).abs() > 1e-12 * (1.0 + v.abs().max(w.abs())) {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                if i <= j {
                    m[(i, j)] = v;
                }
            }
        }
        Ok(m)
    }

    /// Symmetric part `(a + aᵀ)/2` of a square dense matrix.
    pub fn from_dense_sym(a: &DenseMatrix) -> Self {
        debug_assert_eq!(a.rows(), a.cols());
        let n = a.rows();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)]);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Packed upper triangle, row by row.
    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                d[(i, j)] = self[(i, j)];
            }
        }
        d
    }

    /// Iterates `(i, j, value)` over the upper triangle, row-major.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i..n).map(move |j| (i, j, self[(i, j)])))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for (i, j, v) in self.upper_entries() {
            s += if i == j { v * v } else { 2.0 * v * v };
        }
        s.sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.scale(s);
        m
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SymMatrix) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        let mut m = self.clone();
        m.axpy(1.0, other);
        m
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        let mut m = self.clone();
        m.axpy(-1.0, other);
        m
    }

    /// Trace inner product `Σ_{i,j} a_ij b_ij` with both triangles counted.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.n, other.n);
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let p = self[(i, j)] * other[(i, j)];
                s += if i == j { p } else { 2.0 * p };
            }
        }
        s
    }

    /// Principal submatrix on `idx`, in the given order.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut m = Self::zeros(k);
        for a in 0..k {
            for b in a..k {
                m[(a, b)] = self[(idx[a], idx[b])];
            }
        }
        m
    }

    /// Writes `sub` into the principal positions `idx`.
    pub fn set_principal(&mut self, idx: &[usize], sub: &SymMatrix) {
        debug_assert_eq!(idx.len(), sub.n);
        for a in 0..idx.len() {
            for b in a..idx.len() {
                self[(idx[a], idx[b])] = sub[(a, b)];
            }
        }
    }

    /// `P M Pᵀ` for the permutation sending old index `perm[k]` to new index `k`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        self.principal(perm)
    }

    /// Congruence `Qᵀ M Q` for a dense `n × r` matrix `Q`.
    pub fn congruence_t(&self, q: &DenseMatrix) -> SymMatrix {
        let mq = self.to_dense().matmul(q);
        let r = q.cols();
        let mut out = SymMatrix::zeros(r);
        for a in 0..r {
            for b in a..r {
                let mut s = 0.0;
                for i in 0..self.n {
                    s += q[(i, a)] * mq[(i, b)];
                }
                out[(a, b)] = s;
            }
        }
        out
    }

    /// Congruence `Q S Qᵀ` lifting an `r × r` matrix through a dense `n × r` basis.
    pub fn lift(s: &SymMatrix, q: &DenseMatrix) -> SymMatrix {
        let n = q.rows();
        let qs = q.matmul(&s.to_dense());
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut v = 0.0;
                for a in 0..q.cols() {
                    v += qs[(i, a)] * q[(j, a)];
                }
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Isometric vectorization: diagonal entries as-is, off-diagonal entries
    /// scaled by `√2`, upper triangle in row-major order.
    pub fn svec(&self) -> Vec<f64> {
        let r2 = core::f64::consts::SQRT_2;
        self.upper_entries().map(|(i, j, v)| if i == j { v } else { r2 * v }).collect()
    }

    /// Inverse of [`SymMatrix::svec`].
    pub fn smat(n: usize, v: &[f64]) -> Self {
        debug_assert_eq!(v.len(), n * (n + 1) / 2);
        let r2 = core::f64::consts::SQRT_2;
        let mut m = Self::zeros(n);
        m.data.copy_from_slice(v);
        for i in 0..n {
            for j in (i + 1)..n {
                m[(i, j)] /= r2;
            }
        }
        m
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[packed_index(self.n, i, j)]
    }
}

impl IndexMut<(usize, usize)> for SymMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[packed_index(self.n, i, j)]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({}x{}) [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                write!(f, "{:>12.6e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Row-major general dense matrix used for eigenvectors, bases and
/// intermediate products.
#[derive(Clone, PartialEq, Debug)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            debug_assert_eq!(c.len(), rows);
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, cols.len());
        for (k, &j) in cols.iter().enumerate() {
            for i in 0..self.rows {
                m[(i, k)] = self[(i, j)];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len());
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_storage_is_symmetric() {
        let mut m = SymMatrix::zeros(4);
        m[(3, 1)] = 2.5;
        assert_eq!(m[(1, 3)], 2.5);
        assert_eq!(m.packed().len(), 10);
    }

    #[test]
    fn svec_is_isometric() {
        let a = SymMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[2.0, -1.0, 3.0], &[0.0, 3.0, 4.0]]).unwrap();
        let b = SymMatrix::from_rows(&[&[0.5, -1.0, 2.0], &[-1.0, 1.0, 0.0], &[2.0, 0.0, -2.0]]).unwrap();
        let d = dot(&a.svec(), &b.svec());
        assert!((d - a.dot(&b)).abs() < 1e-14);
        assert_eq!(SymMatrix::smat(3, &a.svec()), a);
    }

    #[test]
    fn rejects_asymmetric_rows() {
        assert!(SymMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).is_err());
        assert!(SymMatrix::from_rows(&[&[1.0, f64::NAN], &[f64::NAN, 1.0]]).is_err());
    }

    #[test]
    fn congruence_round_trip() {
        let q = DenseMatrix::from_columns(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let s = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let lifted = SymMatrix::lift(&s, &q);
        assert_eq!(lifted[(0, 2)], 1.0);
        assert_eq!(lifted[(1, 1)], 0.0);
        assert_eq!(lifted.congruence_t(&q), s);
    }
}
