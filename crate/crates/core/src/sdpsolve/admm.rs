//! Alternating direction augmented Lagrangian method on the dual.

use alloc::vec::Vec;

use super::blocked::{frob_inner, BlockedData, Var};
use super::{BackendOutput, SolveStatus, SolverSettings};
use crate::symcore::linalg::{cholesky, cholesky_solve, pseudo_solve};
use crate::symcore::{dot, eigen_sym, norm2, DenseMatrix, SymMatrix};

const TARGET: f64 = 1e-10;

/// Splits `v` into `(v₊, v₋)` with `v = v₊ − v₋`, both in the cone.
fn split_cone(v: &Var) -> Option<(Var, Var)> {
    let mut pos = Var::zeros_like(v);
    let mut neg = Var::zeros_like(v);
    for (b, m) in v.mats.iter().enumerate() {
        if m.rows() == 0 {
            continue;
        }
        let e = eigen_sym(&SymMatrix::from_dense_sym(m)).ok()?;
        pos.mats[b] = e.reconstruct_with(|l| l.max(0.0)).to_dense();
        neg.mats[b] = e.reconstruct_with(|l| (-l).max(0.0)).to_dense();
    }
    for (l, &a) in v.vec.iter().enumerate() {
        pos.vec[l] = a.max(0.0);
        neg.vec[l] = (-a).max(0.0);
    }
    Some((pos, neg))
}

fn gram(data: &BlockedData) -> DenseMatrix {
    let m = data.rows.len();
    let mut g = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let (ri, rj) = (&data.rows[i], &data.rows[j]);
            let mut s = dot(&ri.g, &rj.g);
            for (a, b) in ri.blocks.iter().zip(&rj.blocks) {
                if let (Some(a), Some(b)) = (a, b) {
                    s += frob_inner(a, b);
                }
            }
            g[(i, j)] = s;
            g[(j, i)] = s;
        }
    }
    g
}

pub(crate) fn solve(data: &BlockedData, settings: &SolverSettings) -> BackendOutput {
    let m = data.rows.len();
    let g = gram(data);
    let chol = cholesky(&g);
    let solve_gram = |r: &[f64]| match &chol {
        Some(l) => cholesky_solve(l, r),
        None => pseudo_solve(&g, r, 1e-12),
    };
    let b_norm = norm2(&data.b);
    let c_norm = data.c.norm();

    let mut x = Var::zeros_like(&data.c);
    let mut z = Var::zeros_like(&data.c);
    let mut y = alloc::vec![0.0; m];
    let mut mu = 1.0f64;
    let cap = settings.iteration_cap();
    let mut prev = (x.clone(), y.clone());
    let mut status = SolveStatus::SlowProgress;
    let mut iterations = 0;

    while iterations < cap {
        prev = (x.clone(), y.clone());
        // y = (AAᵀ)⁻¹ (μ(b − A(X)) + A(C − Z))
        let ax = data.apply(&x);
        let acz = data.apply(&data.c.sub(&z));
        let rhs: Vec<f64> = data.b.iter().zip(&ax).zip(&acz).map(|((b, a), c)| mu * (b - a) + c).collect();
        y = solve_gram(&rhs);
        let mut v = data.c.sub(&data.apply_t(&y));
        v.axpy(-mu, &x);
        let (pos, neg) = match split_cone(&v) {
            Some(p) => p,
            None => break,
        };
        z = pos;
        x = neg;
        x.scale(1.0 / mu);
        iterations += 1;

        let ax = data.apply(&x);
        let rp: Vec<f64> = data.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut rd = data.c.sub(&data.apply_t(&y));
        rd.axpy(-1.0, &z);
        let pinf = norm2(&rp) / (1.0 + b_norm);
        let dinf = rd.norm() / (1.0 + c_norm);
        let pobj = data.c.inner(&x);
        let dobj = dot(&data.b, &y);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if pinf <= TARGET && dinf <= TARGET && gap <= TARGET {
            status = SolveStatus::Optimal;
            break;
        }
        if iterations % 50 == 0 {
            if pinf > 10.0 * dinf {
                mu = (mu / 1.6).max(1e-6);
            } else if dinf > 10.0 * pinf {
                mu = (mu * 1.6).min(1e6);
            }
        }
    }

    if status != SolveStatus::Optimal {
        // diverging iterates: their differences approximate an improving ray
        let dx = x.sub(&prev.0);
        let dy: Vec<f64> = y.iter().zip(&prev.1).map(|(a, b)| a - b).collect();
        let bdy = dot(&data.b, &dy);
        if bdy > 0.0 {
            let yh: Vec<f64> = dy.iter().map(|v| v / bdy).collect();
            if data.apply_t(&yh).max_eig() <= settings.tol_certificate {
                return BackendOutput { status: SolveStatus::PrimalInfeasible, x, y: dy, z, iterations };
            }
        }
        let cdx = data.c.inner(&dx);
        if cdx < 0.0 && norm2(&data.apply(&dx)) / -cdx <= settings.tol_certificate && dx.min_eig() >= -1e-12 {
            return BackendOutput { status: SolveStatus::DualInfeasible, x: dx, y, z, iterations };
        }
    }
    BackendOutput { status, x, y, z, iterations }
}
