//! Infeasible-start primal-dual interior point method with the HKM search
//! direction and a Mehrotra predictor-corrector.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused whenever std is linked into the build
use num_traits::Float;

use super::blocked::{frob_inner, sym_in_place, BlockedData, Var};
use super::{BackendOutput, SolveStatus, SolverSettings};
use crate::symcore::linalg::{cholesky, cholesky_solve, lower_inverse, pseudo_solve};
use crate::symcore::{dot, eigen_sym, norm2, DenseMatrix, SymMatrix};

const TARGET: f64 = 1e-11;
const RAY_TOL: f64 = 1e-9;
const STEP_FRACTION: f64 = 0.98;

struct Direction {
    dx: Var,
    dy: Vec<f64>,
    dz: Var,
}

/// Per-iteration factorizations shared by predictor and corrector.
struct Newton<'a> {
    data: &'a BlockedData,
    x: &'a Var,
    zinv: Vec<DenseMatrix>,
    rd: Var,
    rp: Vec<f64>,
    chol: Option<DenseMatrix>,
    schur: DenseMatrix,
}

impl<'a> Newton<'a> {
    fn new(data: &'a BlockedData, x: &'a Var, z: &Var, rp: Vec<f64>, rd: Var) -> Option<Self> {
        let zinv = z.mats.iter().map(inverse_pd).collect::<Option<Vec<_>>>()?;
        let m = data.rows.len();
        let mut schur = DenseMatrix::zeros(m, m);
        for (b, (xb, zb)) in x.mats.iter().zip(&zinv).enumerate() {
            let active: Vec<(usize, &DenseMatrix)> =
                data.rows.iter().enumerate().filter_map(|(i, r)| r.blocks[b].as_ref().map(|a| (i, a))).collect();
            for &(i, ai) in &active {
                let g = xb.matmul(ai).matmul(zb);
                for &(j, aj) in &active {
                    if j >= i {
                        schur[(i, j)] += frob_inner(aj, &g);
                    }
                }
            }
        }
        let ratio: Vec<f64> = x.vec.iter().zip(&z.vec).map(|(u, w)| u / w).collect();
        for i in 0..m {
            for j in i..m {
                let gi = &data.rows[i].g;
                let gj = &data.rows[j].g;
                let s: f64 = gi.iter().zip(gj).zip(&ratio).map(|((a, b), r)| a * b * r).sum();
                schur[(i, j)] += s;
            }
            for j in 0..i {
                schur[(i, j)] = schur[(j, i)];
            }
        }
        let chol = factor(&schur);
        Some(Newton { data, x, zinv, rd, rp, chol, schur })
    }

    fn solve_schur(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.chol {
            Some(l) => cholesky_solve(l, rhs),
            None => pseudo_solve(&self.schur, rhs, 1e-14),
        }
    }

    /// Direction for complementarity target `R` (matrix blocks, scalar part).
    fn direction(&self, r: &Var, z: &Var) -> Direction {
        let x = self.x;
        let rz: Vec<DenseMatrix> = r.mats.iter().zip(&self.zinv).map(|(rb, zi)| rb.matmul(zi)).collect();
        let xrdz: Vec<DenseMatrix> =
            x.mats.iter().zip(&self.rd.mats).zip(&self.zinv).map(|((xb, rdb), zi)| xb.matmul(rdb).matmul(zi)).collect();
        let rz_s: Vec<f64> = r.vec.iter().zip(&z.vec).map(|(a, w)| a / w).collect();
        let xrdz_s: Vec<f64> = x.vec.iter().zip(&self.rd.vec).zip(&z.vec).map(|((u, d), w)| u * d / w).collect();
        let a1 = self.data.apply_general(&rz, &rz_s);
        let a2 = self.data.apply_general(&xrdz, &xrdz_s);
        let rhs: Vec<f64> = self.rp.iter().zip(a1.iter().zip(&a2)).map(|(p, (a, b))| p - a + b).collect();
        let dy = self.solve_schur(&rhs);
        let mut dz = self.rd.clone();
        dz.axpy(-1.0, &self.data.apply_t(&dy));
        dz.symmetrize();
        let mats = r
            .mats
            .iter()
            .zip(&x.mats)
            .zip(&dz.mats)
            .zip(&self.zinv)
            .map(|(((rb, xb), dzb), zi)| {
                let mut t = rb.clone();
                let xdz = xb.matmul(dzb);
                for i in 0..t.rows() {
                    for j in 0..t.cols() {
                        t[(i, j)] -= xdz[(i, j)];
                    }
                }
                let mut d = t.matmul(zi);
                sym_in_place(&mut d);
                d
            })
            .collect();
        let vec = r.vec.iter().zip(&x.vec).zip(&dz.vec).zip(&z.vec).map(|(((rl, u), dw), w)| (rl - u * dw) / w).collect();
        Direction { dx: Var { mats, vec }, dy, dz }
    }
}

fn factor(m: &DenseMatrix) -> Option<DenseMatrix> {
    if let Some(l) = cholesky(m) {
        return Some(l);
    }
    let n = m.rows();
    let scale = (0..n).fold(0.0f64, |s, i| s.max(m[(i, i)].abs())).max(f64::MIN_POSITIVE);
    for reg in [1e-14, 1e-12, 1e-10] {
        let mut r = m.clone();
        for i in 0..n {
            r[(i, i)] += reg * scale;
        }
        if let Some(l) = cholesky(&r) {
            return Some(l);
        }
    }
    None
}

fn inverse_pd(a: &DenseMatrix) -> Option<DenseMatrix> {
    if a.rows() == 0 {
        return Some(a.clone());
    }
    let l = cholesky(a)?;
    let li = lower_inverse(&l);
    let mut inv = li.transpose().matmul(&li);
    sym_in_place(&mut inv);
    Some(inv)
}

/// Largest `α` with `X + αD ⪰ 0` (infinite when `D` is psd).
fn max_step(x: &Var, d: &Var) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.mats.iter().zip(&d.mats) {
        if xb.rows() == 0 {
            continue;
        }
        let lam = match cholesky(xb) {
            Some(l) => {
                let li = lower_inverse(&l);
                let mut t = li.matmul(db).matmul(&li.transpose());
                sym_in_place(&mut t);
                match eigen_sym(&SymMatrix::from_dense_sym(&t)) {
                    Ok(e) => e.min(),
                    Err(_) => return 0.0,
                }
            }
            None => return 0.0,
        };
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    for (&u, &du) in x.vec.iter().zip(&d.vec) {
        if du < 0.0 {
            alpha = alpha.min(-u / du);
        }
    }
    alpha
}

fn complementarity_target(x: &Var, z: &Var, sigma_mu: f64, corr: Option<&Direction>) -> Var {
    let mats = x
        .mats
        .iter()
        .zip(&z.mats)
        .enumerate()
        .map(|(b, (xb, zb))| {
            let mut r = xb.matmul(zb);
            if let Some(c) = corr {
                let p = c.dx.mats[b].matmul(&c.dz.mats[b]);
                for i in 0..r.rows() {
                    for j in 0..r.cols() {
                        r[(i, j)] += p[(i, j)];
                    }
                }
            }
            for i in 0..r.rows() {
                for j in 0..r.cols() {
                    r[(i, j)] = -r[(i, j)];
                }
                r[(i, i)] += sigma_mu;
            }
            r
        })
        .collect();
    let vec = x
        .vec
        .iter()
        .zip(&z.vec)
        .enumerate()
        .map(|(l, (u, w))| {
            let extra = corr.map_or(0.0, |c| c.dx.vec[l] * c.dz.vec[l]);
            sigma_mu - u * w - extra
        })
        .collect();
    Var { mats, vec }
}

struct Merit {
    primal: f64,
    dual: f64,
    gap: f64,
}

impl Merit {
    fn worst(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

/// `λ_max(Aᵀŷ)` for `ŷ = y / bᵀy`; certifies primal infeasibility when small.
fn primal_ray_residual(data: &BlockedData, y: &[f64]) -> Option<f64> {
    let by = dot(&data.b, y);
    if !(by > 0.0) {
        return None;
    }
    let yh: Vec<f64> = y.iter().map(|v| v / by).collect();
    let r = data.apply_t(&yh).max_eig();
    if r.is_nan() {
        None
    } else {
        Some(r.max(0.0))
    }
}

/// `‖A(X̂)‖` for `X̂ = X / (−⟨C,X⟩)`; certifies dual infeasibility when small.
fn dual_ray_residual(data: &BlockedData, x: &Var) -> Option<f64> {
    let cx = data.c.inner(x);
    if !(cx < 0.0) {
        return None;
    }
    let ax = data.apply(x);
    Some(norm2(&ax) / -cx)
}

pub(crate) fn solve(data: &BlockedData, settings: &SolverSettings) -> BackendOutput {
    let m = data.rows.len();
    let big_n = data.sizes.iter().sum::<usize>() + data.q;
    if big_n == 0 {
        let x = Var::zeros_like(&data.c);
        let status = if data.b.iter().all(|&b| b == 0.0) { SolveStatus::Optimal } else { SolveStatus::PrimalInfeasible };
        let y = if status == SolveStatus::Optimal {
            vec![0.0; m]
        } else {
            data.b.iter().map(|&b| b.signum()).collect()
        };
        return BackendOutput { status, z: x.clone(), x, y, iterations: 0 };
    }

    let b_norm = norm2(&data.b);
    let c_norm = data.c.norm();
    let nf = big_n as f64;
    let xi_p = data.b.iter().fold(10.0f64.max(nf.sqrt()), |acc, &b| acc.max((1.0 + b.abs()) / 2.0));
    let xi_d = 10.0f64.max(nf.sqrt()).max(c_norm);
    let mut x = Var::scaled_identity(&data.sizes, data.q, xi_p);
    let mut z = Var::scaled_identity(&data.sizes, data.q, xi_d);
    let mut y = vec![0.0; m];

    let mut best: Option<(f64, Var, Vec<f64>, Var)> = None;
    let mut since_improved = 0usize;
    let mut mark = f64::INFINITY;
    let mut tiny_steps = 0usize;
    let cap = settings.iteration_cap();
    let mut iterations = 0;

    let finish = |status, x: Var, y: Vec<f64>, z: Var, iterations| BackendOutput { status, x, y, z, iterations };

    while iterations < cap {
        let ax = data.apply(&x);
        let rp: Vec<f64> = data.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut rd = data.c.sub(&data.apply_t(&y));
        rd.axpy(-1.0, &z);
        let pobj = data.c.inner(&x);
        let dobj = dot(&data.b, &y);
        let merit = Merit {
            primal: norm2(&rp) / (1.0 + b_norm),
            dual: rd.norm() / (1.0 + c_norm),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
        };
        let worst = merit.worst();
        if !worst.is_finite() {
            break;
        }
        // progress means halving the merit since the last mark
        if worst < 0.5 * mark {
            mark = worst;
            since_improved = 0;
        } else {
            since_improved += 1;
        }
        if best.as_ref().is_none_or(|(w, ..)| worst < *w) {
            best = Some((worst, x.clone(), y.clone(), z.clone()));
        }
        if merit.primal <= TARGET && merit.dual <= TARGET && merit.gap <= TARGET {
            return finish(SolveStatus::Optimal, x, y, z, iterations);
        }
        if primal_ray_residual(data, &y).is_some_and(|r| r <= RAY_TOL) {
            return finish(SolveStatus::PrimalInfeasible, x, y, z, iterations);
        }
        if dual_ray_residual(data, &x).is_some_and(|r| r <= RAY_TOL) {
            return finish(SolveStatus::DualInfeasible, x, y, z, iterations);
        }
        if since_improved >= 20 || tiny_steps >= 3 {
            break;
        }

        let mu = x.inner(&z) / nf;
        let newton = match Newton::new(data, &x, &z, rp, rd) {
            Some(n) => n,
            None => break,
        };
        let r_aff = complementarity_target(&x, &z, 0.0, None);
        let pred = newton.direction(&r_aff, &z);
        let ap = max_step(&x, &pred.dx).min(1.0);
        let ad = max_step(&z, &pred.dz).min(1.0);
        let mut xa = x.clone();
        xa.axpy(ap, &pred.dx);
        let mut za = z.clone();
        za.axpy(ad, &pred.dz);
        let mu_aff = xa.inner(&za) / nf;
        let sigma = if mu > 0.0 { (mu_aff / mu).max(0.0).min(1.0).powi(3) } else { 0.0 };
        let r = complementarity_target(&x, &z, sigma * mu, Some(&pred));
        let dir = newton.direction(&r, &z);
        drop(newton);

        let ap = (STEP_FRACTION * max_step(&x, &dir.dx)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&z, &dir.dz)).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) {
            break;
        }
        if ap < 1e-10 && ad < 1e-10 {
            tiny_steps += 1;
        } else {
            tiny_steps = 0;
        }
        x.axpy(ap, &dir.dx);
        x.symmetrize();
        for (yi, d) in y.iter_mut().zip(&dir.dy) {
            *yi += ad * d;
        }
        z.axpy(ad, &dir.dz);
        z.symmetrize();
        iterations += 1;
    }

    let loose = settings.tol_certificate.min(1e-6);
    if primal_ray_residual(data, &y).is_some_and(|r| r <= loose) {
        return finish(SolveStatus::PrimalInfeasible, x, y, z, iterations);
    }
    if dual_ray_residual(data, &x).is_some_and(|r| r <= loose) {
        return finish(SolveStatus::DualInfeasible, x, y, z, iterations);
    }
    match best {
        Some((_, bx, by, bz)) => finish(SolveStatus::SlowProgress, bx, by, bz, iterations),
        None => finish(SolveStatus::SlowProgress, x, y, z, iterations),
    }
}
