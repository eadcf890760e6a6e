//! Independent oracles and seeded instance generators shared by the
//! integration tests. Nothing here calls into the solver.

#![allow(dead_code)]

use lmi_iis_core::pencil::Pencil;
use lmi_iis_core::sdpsolve::ConicProblem;
use lmi_iis_core::symcore::{BlockIndexSet, BlockPartition, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian elimination with partial pivoting on a square system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Indices of a maximal linearly independent subset of `rows`.
pub fn independent_rows(rows: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut keep = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for q in &basis {
            let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
        }
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rn = r.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > tol * rn.max(1.0) {
            basis.push(v.into_iter().map(|a| a / nrm).collect());
            keep.push(i);
        }
    }
    keep
}

fn combinations(n: usize, r: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize) {
    if cur.len() == r {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, r, out, cur, i + 1);
        cur.pop();
    }
}

/// Vertices of `{x ≥ 0 : Ax = b}` by enumerating every basis.
pub fn lp_vertices(a: &[Vec<f64>], b: &[f64]) -> Vec<Vec<f64>> {
    let ncols = a.first().map_or(0, Vec::len);
    let rows = independent_rows(a, 1e-10);
    let r = rows.len();
    let mut bases = Vec::new();
    combinations(ncols, r, &mut bases, &mut Vec::new(), 0);
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for cols in bases {
        let sub: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| a[i][j]).collect()).collect();
        let rhs: Vec<f64> = rows.iter().map(|&i| b[i]).collect();
        let Some(xs) = gauss_solve(sub, rhs) else { continue };
        if xs.iter().any(|&v| v < -1e-10) {
            continue;
        }
        let mut x = vec![0.0; ncols];
        for (&j, &v) in cols.iter().zip(&xs) {
            x[j] = if v.abs() <= 1e-12 { 0.0 } else { v };
        }
        let consistent = a.iter().zip(b).all(|(row, &bi)| (row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() - bi).abs() <= 1e-9);
        if consistent && !verts.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() <= 1e-9)) {
            verts.push(x);
        }
    }
    verts
}

/// Minimum of `cᵀx` over `{x ≥ 0 : Ax = b}`, assuming the minimum is attained
/// at a vertex.
pub fn lp_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    lp_vertices(a, b).iter().map(|x| c.iter().zip(x).map(|(p, q)| p * q).sum::<f64>()).min_by(f64::total_cmp)
}

/// Nonemptiness of `{y : aⱼᵀy ≤ bⱼ}` by Fourier–Motzkin elimination.
pub fn fm_feasible(rows: &[(Vec<f64>, f64)]) -> bool {
    let Some(m) = rows.first().map(|r| r.0.len()) else { return true };
    let mut cur: Vec<(Vec<f64>, f64)> = rows.to_vec();
    let mut alive: Vec<usize> = (0..m).collect();
    while !alive.is_empty() {
        // cheapest variable first
        let cost = |v: usize| {
            let p = cur.iter().filter(|r| r.0[v] > 1e-12).count();
            let q = cur.iter().filter(|r| r.0[v] < -1e-12).count();
            p * q
        };
        let pos = (0..alive.len()).min_by_key(|&i| cost(alive[i])).unwrap();
        let v = alive.swap_remove(pos);
        let (mut up, mut lo, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for (a, b) in cur {
            let c = a[v];
            if c > 1e-12 {
                up.push((a.iter().map(|x| x / c).collect::<Vec<_>>(), b / c));
            } else if c < -1e-12 {
                lo.push((a.iter().map(|x| x / -c).collect::<Vec<_>>(), b / -c));
            } else {
                let mut a = a;
                a[v] = 0.0;
                rest.push((a, b));
            }
        }
        for (au, bu) in &up {
            for (al, bl) in &lo {
                let mut a: Vec<f64> = au.iter().zip(al).map(|(x, y)| x + y).collect();
                a[v] = 0.0;
                let s = a.iter().fold(0.0f64, |mx, x| mx.max(x.abs())).max(1.0);
                let row = (a.iter().map(|x| x / s).collect::<Vec<_>>(), (bu + bl) / s);
                if !rest.iter().any(|r: &(Vec<f64>, f64)| r.1 == row.1 && r.0 == row.0) {
                    rest.push(row);
                }
            }
        }
        cur = rest;
        if cur.iter().any(|(a, b)| a.iter().all(|x| x.abs() <= 1e-12) && *b < -1e-9) {
            return false;
        }
    }
    cur.iter().all(|(_, b)| *b >= -1e-9)
}

/// Nonemptiness of `{y : aⱼᵀy ≤ bⱼ}` by phase one of a dense tableau simplex
/// with Bland's rule, on `y = y⁺ − y⁻` with slacks and artificials.
pub fn lp_feasible(rows: &[(Vec<f64>, f64)]) -> bool {
    let Some(m) = rows.first().map(|r| r.0.len()) else { return true };
    let n = rows.len();
    let nv = 2 * m + 2 * n;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (j, (a, b)) in rows.iter().enumerate() {
        let scale = a.iter().fold(b.abs(), |mx, x| mx.max(x.abs())).max(1e-300);
        let sign = if *b < 0.0 { -1.0 } else { 1.0 } / scale;
        let mut row = vec![0.0; nv + 1];
        for i in 0..m {
            row[i] = sign * a[i];
            row[m + i] = -sign * a[i];
        }
        row[2 * m + j] = sign;
        row[2 * m + n + j] = 1.0;
        row[nv] = sign * b;
        t.push(row);
    }
    let mut basis: Vec<usize> = (0..n).map(|j| 2 * m + n + j).collect();
    let mut cost = vec![0.0; nv + 1];
    for k in 0..=nv {
        let is_art = k >= 2 * m + n && k < nv;
        cost[k] = if is_art { 0.0 } else { -t.iter().map(|r| r[k]).sum::<f64>() };
    }
    loop {
        let Some(k) = (0..nv).find(|&k| cost[k] < -1e-11) else { break };
        let mut best: Option<(usize, f64)> = None;
        for (j, r) in t.iter().enumerate() {
            if r[k] > 1e-12 {
                let ratio = r[nv] / r[k];
                let better = match best {
                    None => true,
                    Some((bj, br)) => ratio < br - 1e-14 || (ratio <= br + 1e-14 && basis[j] < basis[bj]),
                };
                if better {
                    best = Some((j, ratio));
                }
            }
        }
        let Some((pr, _)) = best else { break };
        let piv = t[pr][k];
        t[pr].iter_mut().for_each(|v| *v /= piv);
        let prow = t[pr].clone();
        for (j, r) in t.iter_mut().enumerate() {
            if j != pr && r[k] != 0.0 {
                let f = r[k];
                r.iter_mut().zip(&prow).for_each(|(v, p)| *v -= f * p);
            }
        }
        let f = cost[k];
        cost.iter_mut().zip(&prow).for_each(|(v, p)| *v -= f * p);
        basis[pr] = k;
    }
    -cost[nv] <= 1e-9
}

/// Linear inequalities `Σᵢ aᵢⱼ yᵢ ≤ a₀ⱼ` of a diagonal pencil, one per row.
pub fn diagonal_rows(p: &Pencil) -> Vec<(Vec<f64>, f64)> {
    (0..p.n()).map(|j| (p.coefficients().iter().map(|a| a[(j, j)]).collect(), p.a0()[(j, j)])).collect()
}

/// Constraint data of the alternative polyhedron of a diagonal pencil.
pub fn alternative_polyhedron(p: &Pencil) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a: Vec<Vec<f64>> = p.coefficients().iter().map(SymMatrix::diag).collect();
    let mut b = vec![0.0; a.len()];
    a.push(p.a0().diag());
    b.push(-1.0);
    (a, b)
}

/// All inclusion-minimal infeasible row subsets, by exhaustive enumeration.
pub fn lp_iis_enumeration(rows: &[(Vec<f64>, f64)]) -> Vec<BlockIndexSet> {
    let n = rows.len();
    let feasible: Vec<bool> = (0..1u32 << n)
        .map(|mask| {
            let sub: Vec<_> = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| rows[j].clone()).collect();
            lp_feasible(&sub)
        })
        .collect();
    (1..1u32 << n)
        .filter(|&mask| !feasible[mask as usize] && (0..n).filter(|j| mask >> j & 1 == 1).all(|j| feasible[(mask & !(1 << j)) as usize]))
        .map(|mask| BlockIndexSet::new((0..n).filter(|j| mask >> j & 1 == 1)))
        .collect()
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let mut s = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            s[(i, j)] = gauss(rng);
        }
    }
    s
}

/// Random symmetric matrix supported on the blocks of `part`.
pub fn random_block_sym(rng: &mut ChaCha8Rng, part: &BlockPartition) -> SymMatrix {
    let mut x = SymMatrix::zeros(part.n());
    for blk in part.blocks() {
        x.set_principal(blk, &random_sym(rng, blk.len()));
    }
    x
}

/// Random psd matrix supported on the blocks of `part`, of full rank when
/// `ridge > 0`.
pub fn random_block_psd(rng: &mut ChaCha8Rng, part: &BlockPartition, ridge: f64) -> SymMatrix {
    let mut x = SymMatrix::zeros(part.n());
    for blk in part.blocks() {
        let g = random_sym(rng, blk.len());
        let mut s = SymMatrix::zeros(blk.len());
        for i in 0..blk.len() {
            for j in i..blk.len() {
                s[(i, j)] = (0..blk.len()).map(|l| g[(i, l)] * g[(j, l)]).sum::<f64>() / blk.len() as f64;
            }
            s[(i, i)] += ridge;
        }
        x.set_principal(blk, &s);
    }
    x
}

pub fn random_partition(rng: &mut ChaCha8Rng, k: usize, max_size: usize) -> BlockPartition {
    let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=max_size)).collect();
    BlockPartition::from_sizes(&sizes).expect("positive sizes")
}

pub fn random_pencil(rng: &mut ChaCha8Rng, part: &BlockPartition, m: usize) -> Pencil {
    let a0 = random_block_sym(rng, part);
    let a = (0..m).map(|_| random_block_sym(rng, part)).collect();
    Pencil::new(a0, a, part.clone()).expect("block diagonal by construction")
}

pub fn random_diagonal_pencil(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Pencil {
    random_pencil(rng, &BlockPartition::singletons(n), m)
}

/// `Σ_B n_B(n_B+1)/2`, the dimension of block-diagonal symmetric matrices.
pub fn block_dimension(part: &BlockPartition) -> usize {
    part.sizes().iter().map(|s| s * (s + 1) / 2).sum()
}

/// A standard-form problem with a planted interior primal point
/// `X₀ ≻ 0, u₀ > 0` and interior dual slack `Z₀ ≻ 0, w₀ > 0`.
pub fn planted_problem(rng: &mut ChaCha8Rng, blocks: Vec<usize>, q: usize, m: usize) -> ConicProblem {
    let part = BlockPartition::from_sizes(&blocks).expect("positive sizes");
    let x0 = random_block_psd(rng, &part, 0.5);
    let z0 = random_block_psd(rng, &part, 0.5);
    let u0: Vec<f64> = (0..q).map(|_| rng.random_range(0.5..2.0)).collect();
    let w0: Vec<f64> = (0..q).map(|_| rng.random_range(0.5..2.0)).collect();
    let y0: Vec<f64> = (0..m).map(|_| gauss(rng)).collect();
    let mut prob = ConicProblem::new(blocks, q);
    let mut c = z0;
    let mut cv = w0;
    for &yi in &y0 {
        let a = random_block_sym(rng, &part);
        let g: Vec<f64> = (0..q).map(|_| gauss(rng)).collect();
        let b = a.dot(&x0) + g.iter().zip(&u0).map(|(p, q)| p * q).sum::<f64>();
        c.axpy(yi, &a);
        cv.iter_mut().zip(&g).for_each(|(cj, gj)| *cj += yi * gj);
        prob.add_constraint(a, g, b).expect("block diagonal by construction");
    }
    prob.set_objective(c, cv).expect("dimensions match");
    prob
}
