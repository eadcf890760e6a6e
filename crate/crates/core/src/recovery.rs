//! Block-sparse uniqueness: sign statistics of block eigenvalues, the kernel
//! of the constraint map, the recovery condition, randomized singleton
//! tests and the example generators.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::pencil::Pencil;
use crate::sdpsolve::{solve, ConicProblem, SolveStatus, SolverSettings};
use crate::symcore::linalg::{pseudo_solve, svd};
use crate::symcore::{
    dot, eigen_sym, extract_block, is_block_diagonal, min_eigenvalue, norm2, operator_norm, BlockPartition, DenseMatrix,
    SymMatrix,
};

#[derive(Clone, Debug, PartialEq)]
pub struct SignStats {
    /// Blocks with at least one positive eigenvalue.
    pub sigma_plus: usize,
    /// Blocks with at least one negative eigenvalue.
    pub sigma_minus: usize,
    /// `(λ_min, λ_max)` per block.
    pub extremes: Vec<(f64, f64)>,
}

/// Counts blocks with a positive (negative) eigenvalue beyond
/// `tol·(1 + ‖V_B‖₂)`.
pub fn sign_stats(v: &SymMatrix, part: &BlockPartition, tol: f64) -> Result<SignStats> {
    if v.dim() != part.n() {
        return Err(Error::DimensionMismatch { expected: part.n(), found: v.dim() });
    }
    let mut stats = SignStats { sigma_plus: 0, sigma_minus: 0, extremes: Vec::with_capacity(part.len()) };
    for b in 0..part.len() {
        let e = eigen_sym(&extract_block(v, part, b)?)?;
        let (lo, hi) = (e.min(), e.max());
        let cut = tol * (1.0 + e.spectral_radius());
        if hi > cut {
            stats.sigma_plus += 1;
        }
        if lo < -cut {
            stats.sigma_minus += 1;
        }
        stats.extremes.push((lo, hi));
    }
    Ok(stats)
}

/// Isometric coordinates of block-diagonal symmetric matrices: per block,
/// the upper triangle with off-diagonal entries scaled by `√2`.
fn block_svec(a: &SymMatrix, part: &BlockPartition) -> Vec<f64> {
    let mut out = Vec::new();
    for blk in part.blocks() {
        for (p, &i) in blk.iter().enumerate() {
            for &j in &blk[p..] {
                out.push(if i == j { a[(i, j)] } else { core::f64::consts::SQRT_2 * a[(i, j)] });
            }
        }
    }
    out
}

fn block_smat(v: &[f64], part: &BlockPartition) -> SymMatrix {
    let mut a = SymMatrix::zeros(part.n());
    let mut k = 0;
    for blk in part.blocks() {
        for (p, &i) in blk.iter().enumerate() {
            for &j in &blk[p..] {
                a[(i, j)] = if i == j { v[k] } else { v[k] / core::f64::consts::SQRT_2 };
                k += 1;
            }
        }
    }
    a
}

/// Orthonormal basis of `{V block diagonal : ⟨Aᵢ,V⟩ = 0 ∀i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBasis {
    pub basis: Vec<SymMatrix>,
}

impl KernelBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// `Σ cᵢ Vᵢ`.
    pub fn combine(&self, coef: &[f64]) -> SymMatrix {
        let n = self.basis.first().map_or(0, SymMatrix::dim);
        let mut out = SymMatrix::zeros(n);
        for (c, v) in coef.iter().zip(&self.basis) {
            out.axpy(*c, v);
        }
        out
    }
}

/// Brings the rows of `rows` (an orthonormal set) to a canonical basis of
/// the same span: reduced row echelon form with leftmost pivots, then
/// Gram–Schmidt in order, first nonzero entry positive.
fn canonical_span(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let d = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..width {
        if r == d {
            break;
        }
        let piv = (r..d).max_by(|&a, &b| rows[a][col].abs().partial_cmp(&rows[b][col].abs()).unwrap()).unwrap();
        if rows[piv][col].abs() <= 1e-9 {
            continue;
        }
        rows.swap(r, piv);
        let pv = rows[r][col];
        rows[r].iter_mut().for_each(|v| *v /= pv);
        for i in 0..d {
            if i != r {
                let f = rows[i][col];
                if f != 0.0 {
                    let pivot_row = rows[r].clone();
                    rows[i].iter_mut().zip(&pivot_row).for_each(|(a, b)| *a -= f * b);
                }
            }
        }
        r += 1;
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(d);
    for mut v in rows {
        for _ in 0..2 {
            for q in &out {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        for x in v.iter_mut() {
            if x.abs() < 1e-15 {
                *x = 0.0;
            }
        }
        let nv = norm2(&v);
        v.iter_mut().for_each(|a| *a /= nv);
        if v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0) {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        out.push(v);
    }
    out
}

pub fn constraint_kernel(matrices: &[SymMatrix], part: &BlockPartition) -> Result<KernelBasis> {
    for a in matrices {
        if a.dim() != part.n() {
            return Err(Error::DimensionMismatch { expected: part.n(), found: a.dim() });
        }
    }
    let width: usize = part.sizes().iter().map(|s| s * (s + 1) / 2).sum();
    let data: Vec<f64> = matrices.iter().flat_map(|a| block_svec(a, part)).collect();
    let map = DenseMatrix::from_row_major(matrices.len(), width, data);
    let f = svd(&map);
    let null = f.null_space(1e-9);
    let rows: Vec<Vec<f64>> = (0..null.cols()).map(|j| null.column(j)).collect();
    let basis = canonical_span(rows).iter().map(|v| block_smat(v, part)).collect();
    Ok(KernelBasis { basis })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Holds,
    /// A kernel element with `min(σ₊, σ₋) ≤ t`, oriented so that `σ₋ ≤ σ₊`
    /// and scaled to max-abs entry 1.
    Fails(SymMatrix),
    /// No counterexample among this many sampled kernel elements.
    InconclusiveSampled(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Kernel dimension at most one: decided exactly.
    ExactKernel,
    Randomized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessVerdict {
    pub outcome: Outcome,
    pub t: usize,
    pub mode: CheckMode,
    pub kernel_dimension: usize,
}

impl UniquenessVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn witness(&self) -> Option<&SymMatrix> {
        match &self.outcome {
            Outcome::Fails(v) => Some(v),
            _ => None,
        }
    }
}

/// Returns the oriented, rescaled witness if `v` violates the condition.
fn violation(v: &SymMatrix, part: &BlockPartition, t: usize, tol: f64) -> Result<Option<SymMatrix>> {
    let scale = v.max_abs();
    if scale == 0.0 {
        return Ok(None);
    }
    let s = sign_stats(v, part, tol)?;
    if s.sigma_plus.min(s.sigma_minus) > t {
        return Ok(None);
    }
    let sign = if s.sigma_minus <= s.sigma_plus { 1.0 } else { -1.0 };
    Ok(Some(v.scaled(sign / scale)))
}

/// Tests whether every nonzero kernel element has more than `t` blocks with
/// a positive and more than `t` blocks with a negative eigenvalue. Exact for
/// kernel dimension ≤ 1; otherwise a seeded search for counterexamples.
pub fn check_recovery_condition(
    matrices: &[SymMatrix],
    part: &BlockPartition,
    t: usize,
    trials: usize,
    settings: &SolverSettings,
) -> Result<UniquenessVerdict> {
    let kernel = constraint_kernel(matrices, part)?;
    let d = kernel.dimension();
    let tol = settings.sign_tol;
    let verdict = |outcome, mode| UniquenessVerdict { outcome, t, mode, kernel_dimension: d };
    if d == 0 {
        return Ok(verdict(Outcome::Holds, CheckMode::ExactKernel));
    }
    if d == 1 {
        let outcome = match violation(&kernel.basis[0], part, t, tol)? {
            Some(w) => Outcome::Fails(w),
            None => Outcome::Holds,
        };
        return Ok(verdict(outcome, CheckMode::ExactKernel));
    }

    // deterministic pass: basis vectors and pairwise sums/differences
    for v in &kernel.basis {
        if let Some(w) = violation(v, part, t, tol)? {
            return Ok(verdict(Outcome::Fails(w), CheckMode::Randomized));
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            for s in [1.0, -1.0] {
                let mut v = kernel.basis[i].clone();
                v.axpy(s, &kernel.basis[j]);
                if let Some(w) = violation(&v, part, t, tol)? {
                    return Ok(verdict(Outcome::Fails(w), CheckMode::Randomized));
                }
            }
        }
    }

    // rotation-invariant samples
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    for _ in 0..trials {
        let coef: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(w) = violation(&kernel.combine(&coef), part, t, tol)? {
            return Ok(verdict(Outcome::Fails(w), CheckMode::Randomized));
        }
    }

    // targeted: zero whole blocks greedily while a kernel element survives
    for start in 0..part.len() {
        let mut zeroed: Vec<usize> = Vec::new();
        for b in (start..part.len()).chain(0..start) {
            let mut trial = zeroed.clone();
            trial.push(b);
            if let Some(v) = kernel_vanishing_on(&kernel, part, &trial)? {
                zeroed = trial;
                if let Some(w) = violation(&v, part, t, tol)? {
                    return Ok(verdict(Outcome::Fails(w), CheckMode::Randomized));
                }
            }
        }
    }
    Ok(verdict(Outcome::InconclusiveSampled(trials), CheckMode::Randomized))
}

/// A nonzero kernel element vanishing on the given blocks, if any.
fn kernel_vanishing_on(kernel: &KernelBasis, part: &BlockPartition, blocks: &[usize]) -> Result<Option<SymMatrix>> {
    let d = kernel.dimension();
    let mut rows: Vec<f64> = Vec::new();
    let mut count = 0;
    for &b in blocks {
        let idx = part.block(b);
        for (p, &i) in idx.iter().enumerate() {
            for &j in &idx[p..] {
                rows.extend(kernel.basis.iter().map(|v| v[(i, j)]));
                count += 1;
            }
        }
    }
    let map = DenseMatrix::from_row_major(count, d, rows);
    let f = svd(&map);
    let null = f.null_space(1e-9);
    if null.cols() == 0 {
        return Ok(None);
    }
    let v = kernel.combine(&null.column(0));
    let mut v = v;
    for &b in blocks {
        let idx = part.block(b);
        v.set_principal(idx, &SymMatrix::zeros(idx.len()));
    }
    if v.max_abs() <= 1e-9 {
        return Ok(None);
    }
    Ok(Some(v))
}

/// Splits `V` blockwise into `X2 − X1` with `X1 = (−V)₊`, `X2 = V₊`.
pub fn split_psd_pair(v: &SymMatrix, part: &BlockPartition) -> Result<(SymMatrix, SymMatrix)> {
    if v.dim() != part.n() {
        return Err(Error::DimensionMismatch { expected: part.n(), found: v.dim() });
    }
    if v.max_abs() == 0.0 {
        return Err(Error::InvalidArgument("cannot split the zero matrix".into()));
    }
    if !is_block_diagonal(v, part, 0.0)? {
        return Err(Error::InvalidArgument("matrix is not block diagonal".into()));
    }
    let mut x1 = SymMatrix::zeros(part.n());
    let mut x2 = SymMatrix::zeros(part.n());
    for b in 0..part.len() {
        let e = eigen_sym(&extract_block(v, part, b)?)?;
        x1.set_principal(part.block(b), &e.reconstruct_with(|l| (-l).max(0.0)));
        x2.set_principal(part.block(b), &e.reconstruct_with(|l| l.max(0.0)));
    }
    Ok((x1, x2))
}

#[derive(Clone, Debug, PartialEq)]
pub enum SingletonVerdict {
    /// All optimized objectives returned `X0`.
    ProbablyUnique { trials: usize },
    /// `other` is feasible, psd, and differs from `X0`.
    NotUnique { other: SymMatrix },
}

/// Empirical singleton test of `{X ⪰ 0 : ⟨Aᵢ,X⟩ = ⟨Aᵢ,X0⟩}` by minimizing
/// `trials` random objectives and their negatives.
pub fn verify_unique_solution(
    matrices: &[SymMatrix],
    part: &BlockPartition,
    x0: &SymMatrix,
    trials: usize,
    settings: &SolverSettings,
) -> Result<SingletonVerdict> {
    let n = part.n();
    if x0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.dim() });
    }
    if !is_block_diagonal(x0, part, 0.0)? {
        return Err(Error::InvalidArgument("X0 is not block diagonal".into()));
    }
    if n > 0 && min_eigenvalue(x0)? < -settings.tol_psd * (1.0 + operator_norm(x0)?) {
        return Err(Error::InvalidArgument("X0 is not positive semidefinite".into()));
    }
    let perm = part.canonical_permutation();
    let mut inverse = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let mut base = ConicProblem::new(part.sizes(), 0);
    for a in matrices {
        base.add_constraint(a.permuted(&perm), Vec::new(), a.dot(x0))?;
    }
    let targets: Vec<f64> = matrices.iter().map(|a| a.dot(x0)).collect();
    let m = matrices.len();
    let mut gram = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = matrices[i].dot(&matrices[j]);
        }
    }
    // least-squares projection onto the affine constraints, kept only if psd
    let feasible_copy = |x: &SymMatrix| -> Result<Option<SymMatrix>> {
        let r: Vec<f64> = matrices.iter().zip(&targets).map(|(a, t)| t - a.dot(x)).collect();
        let c = pseudo_solve(&gram, &r, 1e-12);
        let mut y = x.clone();
        for (a, ci) in matrices.iter().zip(&c) {
            y.axpy(*ci, a);
        }
        let eq = matrices.iter().zip(&targets).fold(0.0f64, |mx, (a, t)| mx.max((a.dot(&y) - t).abs()));
        let ok = eq <= settings.tol_primal * (1.0 + norm2(&targets)) && min_eigenvalue(&y)? >= 0.0;
        Ok(ok.then_some(y))
    };
    let mut failure = None;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    for _ in 0..trials {
        let mut r = SymMatrix::zeros(n);
        for blk in part.blocks() {
            for (p, &i) in blk.iter().enumerate() {
                for &j in &blk[p..] {
                    r[(i, j)] = StandardNormal.sample(&mut rng);
                }
            }
        }
        for sign in [1.0, -1.0] {
            let obj = r.scaled(sign);
            let mut prob = base.clone();
            prob.set_objective(obj.permuted(&perm), Vec::new())?;
            let sol = solve(&prob, settings)?;
            match sol.status {
                SolveStatus::DualInfeasible => {
                    let mut ray = sol.x.permuted(&inverse);
                    ray.scale(1.0 / ray.max_abs());
                    return Ok(SingletonVerdict::NotUnique { other: x0.add(&ray) });
                }
                SolveStatus::Optimal => {
                    let x = sol.x.permuted(&inverse);
                    let dist = x.sub(x0).max_abs();
                    let gain = obj.dot(x0) - obj.dot(&x);
                    if dist > settings.uniqueness_tol && gain > 1e-9 * (1.0 + obj.dot(x0).abs()) {
                        return Ok(SingletonVerdict::NotUnique { other: x });
                    }
                }
                status => {
                    // an unfinished solve still proves non-uniqueness if its
                    // iterate is a distinct feasible point
                    if let Some(y) = feasible_copy(&sol.x.permuted(&inverse))? {
                        if y.sub(x0).max_abs() > settings.uniqueness_tol {
                            return Ok(SingletonVerdict::NotUnique { other: y });
                        }
                    }
                    failure = Some(Error::Solver { status, iterations: sol.iterations });
                }
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SingletonVerdict::ProbablyUnique { trials })
}

/// A generated constraint family with its predicted kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub matrices: Vec<SymMatrix>,
    pub partition: BlockPartition,
    /// Predicted kernel dimension.
    pub kernel_dimension: usize,
    /// Predicted `σ₊ = σ₋` of every kernel element.
    pub sigma: usize,
}

impl Family {
    /// The family as a pencil whose first matrix plays the role of `A₀`.
    pub fn to_pencil(&self) -> Result<Pencil> {
        let mut it = self.matrices.iter().cloned();
        let a0 = it.next().ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
        Pencil::new(a0, it.collect(), self.partition.clone())
    }
}

/// Diagonal encoding of the bidiagonal system `vᵢ + vᵢ₊₁ = 0` over
/// singleton blocks. Odd `n` uses the construction on `n − 1` variables and
/// pins the last one to zero.
pub fn gen_unique_lp(n: usize) -> Result<Family> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} is too small")));
    }
    let core = n - n % 2;
    let mut matrices = Vec::with_capacity(n - 1);
    for i in 0..core - 1 {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        d[i + 1] = 1.0;
        matrices.push(SymMatrix::from_diag(&d));
    }
    if n % 2 == 1 {
        let mut d = vec![0.0; n];
        d[n - 1] = 1.0;
        matrices.push(SymMatrix::from_diag(&d));
    }
    Ok(Family { matrices, partition: BlockPartition::singletons(n), kernel_dimension: 1, sigma: core / 2 })
}

/// The bidiagonal system over `n = 3k` variables laid out in `k` symmetric
/// 2×2 blocks `[[v₁, v₃], [v₃, v₂]]`, `[[v₄, v₆], [v₆, v₅]]`, ….
pub fn gen_unique_sdp(n: usize) -> Result<Family> {
    if n == 0 || !n.is_multiple_of(3) {
        return Err(Error::InvalidArgument(format!("n = {n} is not a positive multiple of 3")));
    }
    let k = n / 3;
    let dim = 2 * k;
    // variable position (0-based) inside the 2k × 2k matrix
    let place = |v: usize| -> (usize, usize) {
        let (j, r) = (v / 3, v % 3);
        match r {
            0 => (2 * j, 2 * j),
            1 => (2 * j + 1, 2 * j + 1),
            _ => (2 * j, 2 * j + 1),
        }
    };
    let matrices = (0..n - 1)
        .map(|i| {
            let mut a = SymMatrix::zeros(dim);
            for v in [i, i + 1] {
                let (p, q) = place(v);
                a[(p, q)] += if p == q { 1.0 } else { 0.5 };
            }
            a
        })
        .collect();
    let partition = BlockPartition::from_sizes(&vec![2; k])?;
    Ok(Family { matrices, partition, kernel_dimension: 1, sigma: k })
}

fn fixture(a0: SymMatrix) -> Pencil {
    let a1 = SymMatrix::from_diag(&[1.0, -1.0, -1.0, -1.0]);
    let a2 = SymMatrix::from_diag(&[0.0, -1.0, 1.0, 0.0]);
    let part = BlockPartition::new(4, vec![vec![0], vec![1], vec![2, 3]]).expect("fixed partition");
    Pencil::new(a0, vec![a1, a2], part).expect("fixture is block diagonal")
}

/// Three blocks `{1}`, `{2}`, `{3,4}` whose diagonal LP has the alternative
/// polytope with vertices `(1, ½, ½, 0)` and `(½, 0, 0, ½)`.
pub fn gen_blocklinear() -> Pencil {
    fixture(SymMatrix::from_diag(&[0.0, -1.0, -1.0, -2.0]))
}

/// [`gen_blocklinear`] with the coupling `ε` in the last block of `A₀`.
pub fn gen_blocksdp(eps: f64) -> Pencil {
    let mut a0 = SymMatrix::from_diag(&[0.0, -1.0, -1.0, -2.0]);
    a0[(2, 3)] = eps;
    fixture(a0)
}
