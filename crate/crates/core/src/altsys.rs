//! The alternative spectrahedron
//! `S(Σ) = {X ⪰ 0 : ⟨Aᵢ,X⟩ = 0, ⟨A₀,X⟩ = −1}` of a pencil: weak feasibility
//! classification, membership, extremality and purification.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused whenever std is linked into the build
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pencil::Pencil;
use crate::sdpsolve::{solve, solve_alt_pair, ConicProblem, SolveStatus, SolverSettings};
use crate::symcore::linalg::{pseudo_solve, svd};
use crate::symcore::{
    block_support, eigen_sym, extract_block, min_eigenvalue, operator_norm, BlockIndexSet, DenseMatrix, SymMatrix,
};

/// `ε` values for which feasibility witnesses are reported.
pub const WITNESS_EPSILONS: [f64; 2] = [1e-2, 1e-4];

/// Residuals of a candidate member of `S(Σ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MembershipResidual {
    /// `maxᵢ |⟨Aᵢ,X⟩|`.
    pub constraint: f64,
    /// `|⟨A₀,X⟩ + 1|`.
    pub normalization: f64,
    /// `λ_min(X)`.
    pub min_eig: f64,
}

impl MembershipResidual {
    pub fn within(&self, eq_tol: f64, psd_tol: f64) -> bool {
        self.constraint <= eq_tol && self.normalization <= eq_tol && self.min_eig >= -psd_tol
    }
}

pub fn membership_residual(p: &Pencil, x: &SymMatrix) -> Result<MembershipResidual> {
    if x.dim() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: x.dim() });
    }
    let constraint = p.coefficients().iter().fold(0.0f64, |m, a| m.max(a.dot(x).abs()));
    Ok(MembershipResidual {
        constraint,
        normalization: (p.a0().dot(x) + 1.0).abs(),
        min_eig: if p.n() == 0 { 0.0 } else { min_eigenvalue(x)? },
    })
}

/// A (candidate) point of `S(Σ)` with its residuals and block support.
#[derive(Clone, Debug, PartialEq)]
pub struct AltPoint {
    x: SymMatrix,
    residual: MembershipResidual,
    support: BlockIndexSet,
}

impl AltPoint {
    pub fn new(p: &Pencil, x: SymMatrix, settings: &SolverSettings) -> Result<Self> {
        let residual = membership_residual(p, &x)?;
        let support = block_support(&x, p.partition(), settings.support_tol)?;
        Ok(AltPoint { x, residual, support })
    }

    pub fn x(&self) -> &SymMatrix {
        &self.x
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.x
    }

    pub fn residual(&self) -> MembershipResidual {
        self.residual
    }

    pub fn support(&self) -> &BlockIndexSet {
        &self.support
    }

    /// Membership at the certificate tolerances (`10⁻⁷` equalities, `10⁻⁸` psd).
    pub fn is_member(&self) -> bool {
        self.residual.within(1e-7, 1e-8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    WeaklyFeasible,
    WeaklyInfeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityStatus {
    pub verdict: Verdict,
    /// Present iff weakly infeasible.
    pub certificate: Option<AltPoint>,
    /// Optimal value of the bounded alternative program.
    pub eta_opt: f64,
    /// `(ε, y)` with `A(y) + εI ⪰ 0`; populated iff weakly feasible.
    pub epsilon_witnesses: Vec<(f64, Vec<f64>)>,
}

impl FeasibilityStatus {
    pub fn is_infeasible(&self) -> bool {
        self.verdict == Verdict::WeaklyInfeasible
    }

    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::WeaklyFeasible
    }
}

fn feasible_status(p: &Pencil, eta: f64, y: &[f64]) -> Result<FeasibilityStatus> {
    let lmin = if p.n() == 0 { 0.0 } else { min_eigenvalue(&p.evaluate(y)?)? };
    let epsilon_witnesses = WITNESS_EPSILONS.iter().filter(|&&e| lmin + e >= 0.0).map(|&e| (e, y.to_vec())).collect();
    Ok(FeasibilityStatus { verdict: Verdict::WeaklyFeasible, certificate: None, eta_opt: eta, epsilon_witnesses })
}

/// Decides weak feasibility from the optimal value of the trace-bounded
/// alternative program. Values in the dead band between the two thresholds
/// are reported as [`Error::Indeterminate`].
pub fn classify(p: &Pencil, settings: &SolverSettings) -> Result<FeasibilityStatus> {
    if p.is_empty() {
        return feasible_status(p, 0.0, &vec![0.0; p.m()]);
    }
    let sol = match solve_alt_pair(p, settings) {
        Ok(s) => s,
        Err(Error::Solver { status, iterations }) => {
            return Err(Error::Indeterminate(format!("alternative program ended with {status:?} after {iterations} iterations")))
        }
        Err(e) => return Err(e),
    };
    let eta = sol.eta;
    if eta > settings.infeasible_threshold {
        let scale = -p.a0().dot(&sol.x);
        if !(scale > 0.0) {
            return Err(Error::Indeterminate(format!("certificate has ⟨A₀,X⟩ = {}", -scale)));
        }
        let x = clean(p, &sol.x.scaled(1.0 / scale), settings)?;
        let cert = AltPoint::new(p, x, settings)?;
        Ok(FeasibilityStatus { verdict: Verdict::WeaklyInfeasible, certificate: Some(cert), eta_opt: eta, epsilon_witnesses: Vec::new() })
    } else if eta < settings.feasible_threshold {
        feasible_status(p, eta, &sol.y)
    } else {
        Err(Error::Indeterminate(format!("alternative value {eta:e} inside the dead band")))
    }
}

/// Classification of `S(Σ) ∩ {X : X_B = 0 for blocks outside I}`; the
/// certificate, if any, is lifted back to full indices.
pub fn restricted_alt(p: &Pencil, set: &BlockIndexSet, settings: &SolverSettings) -> Result<FeasibilityStatus> {
    let sub = p.subsystem(set)?;
    let mut status = classify(&sub, settings)?;
    if let Some(cert) = status.certificate.take() {
        let full = p.lift(set, cert.x())?;
        status.certificate = Some(AltPoint::new(p, full, settings)?);
    }
    Ok(status)
}

/// Range of a point restricted to its face, one block at a time.
struct Face {
    /// Orthonormal range basis per block (`n_b × r_b`).
    bases: Vec<DenseMatrix>,
    /// Eigenvalues matching the basis columns.
    values: Vec<Vec<f64>>,
    /// Linear map `S ↦ (⟨A₁,QSQᵀ⟩, …, ⟨A_m,QSQᵀ⟩, ⟨A₀,QSQᵀ⟩)` on svec coordinates.
    map: DenseMatrix,
}

impl Face {
    fn rank(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.values
            .iter()
            .map(|v| {
                let o = acc;
                acc += v.len() * (v.len() + 1) / 2;
                o
            })
            .collect()
    }

    fn split(&self, s: &[f64]) -> Vec<SymMatrix> {
        self.offsets().iter().zip(&self.values).map(|(&o, v)| SymMatrix::smat(v.len(), &s[o..o + v.len() * (v.len() + 1) / 2])).collect()
    }

    fn diag_coords(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| SymMatrix::from_diag(v).svec()).collect()
    }

    fn lift(&self, p: &Pencil, blocks: &[SymMatrix]) -> SymMatrix {
        let mut x = SymMatrix::zeros(p.n());
        for (b, (q, s)) in self.bases.iter().zip(blocks).enumerate() {
            x.set_principal(p.partition().block(b), &SymMatrix::lift(s, q));
        }
        x
    }
}

fn face_of(p: &Pencil, x: &SymMatrix, settings: &SolverSettings, strict: bool) -> Result<Face> {
    let scale = 1.0 + operator_norm(x)?;
    let keep = settings.rank_tol * scale;
    let floor = 1e-10 * scale;
    let mut bases = Vec::with_capacity(p.k());
    let mut values = Vec::with_capacity(p.k());
    for b in 0..p.k() {
        let blk = extract_block(x, p.partition(), b)?;
        let e = eigen_sym(&blk)?;
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (j, &l) in e.values.iter().enumerate() {
            if l >= keep {
                cols.push(j);
                vals.push(l);
            } else if strict && l.abs() >= floor {
                return Err(Error::Indeterminate(format!("eigenvalue {l:e} of block {} straddles the rank threshold", b + 1)));
            }
        }
        bases.push(e.vectors.select_columns(&cols));
        values.push(vals);
    }
    let width: usize = values.iter().map(|v| v.len() * (v.len() + 1) / 2).sum();
    let mut data = Vec::with_capacity((p.m() + 1) * width);
    for a in p.coefficients().iter().chain(core::iter::once(p.a0())) {
        for (b, q) in bases.iter().enumerate() {
            let ab = extract_block(a, p.partition(), b)?;
            data.extend(ab.congruence_t(q).svec());
        }
    }
    let map = DenseMatrix::from_row_major(p.m() + 1, width, data);
    Ok(Face { bases, values, map })
}

/// Drops negligible eigenvalues of `x` blockwise and applies the smallest
/// correction inside the resulting face that restores the equalities of
/// `S(Σ)`. Falls back to `x` when the face cannot absorb the residual
/// to within `tol_primal`.
pub fn clean(p: &Pencil, x: &SymMatrix, settings: &SolverSettings) -> Result<SymMatrix> {
    let face = face_of(p, x, settings, false)?;
    if face.rank() == 0 {
        return Ok(x.clone());
    }
    let s0 = face.diag_coords();
    let mut target = vec![0.0; p.m()];
    target.push(-1.0);
    let mapped = face.map.matvec(&s0);
    let r: Vec<f64> = target.iter().zip(&mapped).map(|(t, v)| t - v).collect();
    let delta = pseudo_solve(&face.map, &r, 1e-12);
    let s: Vec<f64> = s0.iter().zip(&delta).map(|(a, d)| a + d).collect();
    let cleaned = face.lift(p, &face.split(&s));
    let before = membership_residual(p, x)?;
    let after = membership_residual(p, &cleaned)?;
    let worst = |r: &MembershipResidual| r.constraint.max(r.normalization).max(-r.min_eig);
    if after.within(settings.tol_primal, settings.tol_psd) || worst(&after) <= worst(&before) {
        Ok(cleaned)
    } else {
        Ok(x.clone())
    }
}

/// Outcome of the facial extremality test.
#[derive(Clone, Debug, PartialEq)]
pub enum Extremality {
    Extreme { rank: usize },
    /// `direction` keeps all equalities of `S(Σ)` and lies in the face of the point.
    NotExtreme { direction: SymMatrix },
}

impl Extremality {
    pub fn is_extreme(&self) -> bool {
        matches!(self, Extremality::Extreme { .. })
    }
}

fn face_kernel(face: &Face, settings: &SolverSettings) -> Result<Option<Vec<f64>>> {
    let width = face.map.cols();
    if width == 0 {
        return Ok(None);
    }
    let f = svd(&face.map);
    let smax = f.max_singular();
    if smax == 0.0 {
        let mut v = vec![0.0; width];
        v[0] = 1.0;
        return Ok(Some(v));
    }
    if f.s.iter().any(|&s| s > settings.kernel_tol * smax && s <= settings.rank_tol * smax) {
        return Err(Error::Indeterminate("singular values of the face map straddle the kernel threshold".into()));
    }
    let null = f.null_space(settings.kernel_tol);
    if null.cols() == 0 {
        return Ok(None);
    }
    Ok(Some(null.column(0)))
}

/// Facial test: `X` is extreme iff no nonzero `S` in the face of `X`
/// satisfies the homogeneous equalities.
pub fn is_extreme(p: &Pencil, x: &AltPoint, settings: &SolverSettings) -> Result<Extremality> {
    let face = face_of(p, x.x(), settings, true)?;
    match face_kernel(&face, settings)? {
        None => Ok(Extremality::Extreme { rank: face.rank() }),
        Some(s) => {
            let mut w = face.lift(p, &face.split(&s));
            let m = w.max_abs();
            if m > 0.0 {
                w.scale(1.0 / m);
            }
            Ok(Extremality::NotExtreme { direction: w })
        }
    }
}

/// Largest `t` with `Λ + tS ⪰ 0` over all blocks (`Λ` diagonal positive).
fn boundary_step(values: &[Vec<f64>], dirs: &[SymMatrix]) -> Result<f64> {
    let mut t = f64::INFINITY;
    for (lam, s) in values.iter().zip(dirs) {
        if lam.is_empty() {
            continue;
        }
        let inv_sqrt: Vec<f64> = lam.iter().map(|l| 1.0 / l.sqrt()).collect();
        let mut scaled = s.clone();
        for i in 0..lam.len() {
            for j in i..lam.len() {
                scaled[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
            }
        }
        let lmin = eigen_sym(&scaled)?.min();
        if lmin < 0.0 {
            t = t.min(-1.0 / lmin);
        }
    }
    Ok(t)
}

/// Moves a member of `S(Σ)` to an extreme point by repeated line searches
/// along feasible face directions; the rank drops at every step.
pub fn purify(p: &Pencil, start: &AltPoint, settings: &SolverSettings) -> Result<AltPoint> {
    let mut x = clean(p, start.x(), settings)?;
    let mut last_rank = usize::MAX;
    for _ in 0..=p.n() {
        let face = face_of(p, &x, settings, true)?;
        let rank = face.rank();
        if rank >= last_rank {
            return Err(Error::Indeterminate(format!("purification stalled at rank {rank}")));
        }
        last_rank = rank;
        let s = match face_kernel(&face, settings)? {
            None => return AltPoint::new(p, x, settings),
            Some(s) => s,
        };
        let dirs = face.split(&s);
        let neg: Vec<SymMatrix> = dirs.iter().map(|d| d.scaled(-1.0)).collect();
        let t_plus = boundary_step(&face.values, &dirs)?;
        let t_minus = boundary_step(&face.values, &neg)?;
        let (t, d) = match (t_plus.is_finite(), t_minus.is_finite()) {
            (true, true) if t_minus > t_plus => (t_minus, &neg),
            (true, _) => (t_plus, &dirs),
            (false, true) => (t_minus, &neg),
            (false, false) => return Err(Error::Indeterminate("face direction is unbounded both ways".into())),
        };
        let moved: Vec<SymMatrix> = face
            .values
            .iter()
            .zip(d)
            .map(|(lam, s)| {
                let mut m = s.scaled(t);
                for (i, l) in lam.iter().enumerate() {
                    m[(i, i)] += l;
                }
                m
            })
            .collect();
        x = clean(p, &face.lift(p, &moved), settings)?;
    }
    Err(Error::Indeterminate("purification did not terminate".into()))
}

/// A point `X̄ ⪰ λI`, `tr X̄ = 1`, `⟨Aᵢ,X̄⟩ = 0` with maximal `λ`, returned
/// when `λ > 10⁻⁶`.
pub fn strict_kernel_point(p: &Pencil, settings: &SolverSettings) -> Result<Option<SymMatrix>> {
    let n = p.n();
    if n == 0 {
        return Ok(None);
    }
    let part = p.partition();
    let perm = part.canonical_permutation();
    // X = P + λI with scalars (λ, s): maximize λ
    let mut prob = ConicProblem::new(part.sizes(), 2);
    prob.set_objective(SymMatrix::zeros(n), vec![-1.0, 0.0])?;
    for a in p.coefficients() {
        prob.add_constraint(a.permuted(&perm), vec![a.trace(), 0.0], 0.0)?;
    }
    prob.add_constraint(SymMatrix::identity(n), vec![n as f64, 1.0], 1.0)?;
    let sol = solve(&prob, settings)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver { status: sol.status, iterations: sol.iterations });
    }
    let lambda = sol.u[0];
    if lambda <= 1e-6 {
        return Ok(None);
    }
    let mut inverse = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let mut x = sol.x.permuted(&inverse);
    for i in 0..n {
        x[(i, i)] += lambda;
    }
    let tr = x.trace();
    x.scale(1.0 / tr);
    Ok(Some(x))
}

/// Minimizer over `S(Σ)` of a random positive definite block-diagonal
/// objective drawn from `settings.seed`. For generic draws the minimizer is
/// an exposed point of `S(Σ)`.
pub fn seeded_member(p: &Pencil, settings: &SolverSettings) -> Result<AltPoint> {
    let part = p.partition();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut c = SymMatrix::zeros(p.n());
    for b in 0..p.k() {
        let idx = part.block(b);
        let nb = idx.len();
        let g: Vec<f64> = (0..nb * nb).map(|_| rng.sample(StandardNormal)).collect();
        let mut cb = SymMatrix::identity(nb).scaled(0.1);
        for i in 0..nb {
            for j in i..nb {
                cb[(i, j)] += (0..nb).map(|r| g[r * nb + i] * g[r * nb + j]).sum::<f64>() / nb as f64;
            }
        }
        c.set_principal(idx, &cb);
    }
    let perm = part.canonical_permutation();
    let mut prob = ConicProblem::new(part.sizes(), 0);
    prob.set_objective(c.permuted(&perm), Vec::new())?;
    for a in p.coefficients() {
        prob.add_constraint(a.permuted(&perm), Vec::new(), 0.0)?;
    }
    prob.add_constraint(p.a0().permuted(&perm), Vec::new(), -1.0)?;
    let sol = solve(&prob, settings)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::PrimalInfeasible => return Err(Error::NotInfeasible),
        status => return Err(Error::Solver { status, iterations: sol.iterations }),
    }
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    AltPoint::new(p, clean(p, &sol.x.permuted(&inverse), settings)?, settings)
}
