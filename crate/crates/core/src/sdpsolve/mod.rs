//! Small dense conic solver for standard-form semidefinite programs
//!
//! ```text
//! minimize    ⟨C, X⟩ + cᵀu
//! subject to  ⟨Aᵢ, X⟩ + gᵢᵀu = bᵢ,   X ⪰ 0 (block diagonal),  u ≥ 0
//! ```
//!
//! with dual `max bᵀy  s.t.  Z = C − Σ yᵢAᵢ ⪰ 0,  w = c − Σ yᵢgᵢ ≥ 0`.
//!
//! The result is judged by a residual contract rather than by algorithm:
//! an `Optimal` solution satisfies the tolerances in [`SolverSettings`] when
//! recomputed against the original data. Infeasible statuses carry an
//! improving ray.

mod admm;
mod blocked;
mod ipm;

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused whenever std is linked into the build
use num_traits::Float;

use self::blocked::{BlockedData, Row, Var};
use crate::error::{Error, Result};
use crate::pencil::Pencil;
use crate::symcore::{dot, min_eigenvalue, norm2, operator_norm, DenseMatrix, SymMatrix};

/// Back end used by [`solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Infeasible primal-dual path following (HKM direction, Mehrotra corrector).
    InteriorPoint,
    /// Alternating-direction splitting between the affine set and the cone.
    Admm,
}

/// Every tolerance the crate uses, in one place.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub algorithm: Algorithm,
    /// Iteration cap; `None` picks the back end default (200 for the
    /// interior point method, 200 000 for ADMM).
    pub max_iter: Option<usize>,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub tol_gap: f64,
    /// Allowed negative eigenvalue of `X` and `Z` in an optimal solution.
    pub tol_psd: f64,
    /// Residual bound on infeasibility rays.
    pub tol_certificate: f64,
    /// Alternative-program values above this are infeasible.
    pub infeasible_threshold: f64,
    /// Alternative-program values below this are feasible; between the two
    /// thresholds the verdict is indeterminate.
    pub feasible_threshold: f64,
    /// Relative eigenvalue threshold for the rank of a point.
    pub rank_tol: f64,
    /// Relative singular-value threshold for kernels.
    pub kernel_tol: f64,
    /// Absolute entry threshold for block support.
    pub support_tol: f64,
    /// Relative eigenvalue threshold for block sign counts.
    pub sign_tol: f64,
    /// Max-norm separation that counts two solutions as different.
    pub uniqueness_tol: f64,
    pub seed: u64,
    /// Random kernel samples drawn by the uniqueness falsifier.
    pub samples: usize,
    /// Full proper-subset enumeration in IIS verification up to this size.
    pub full_subset_limit: usize,
    /// Largest block count accepted by the brute-force support search.
    pub brute_force_limit: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            algorithm: Algorithm::InteriorPoint,
            max_iter: None,
            tol_primal: 1e-8,
            tol_dual: 1e-8,
            tol_gap: 1e-7,
            tol_psd: 1e-8,
            tol_certificate: 1e-6,
            infeasible_threshold: 1e-7,
            feasible_threshold: 1e-9,
            rank_tol: 1e-7,
            kernel_tol: 1e-9,
            support_tol: 1e-8,
            sign_tol: 1e-8,
            uniqueness_tol: 1e-6,
            seed: 42,
            samples: 1000,
            full_subset_limit: 12,
            brute_force_limit: 12,
        }
    }
}

impl SolverSettings {
    pub fn iteration_cap(&self) -> usize {
        self.max_iter.unwrap_or(match self.algorithm {
            Algorithm::InteriorPoint => 200,
            Algorithm::Admm => 200_000,
        })
    }
}

/// One equality row `⟨A, X⟩ + gᵀu = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicConstraint {
    pub a: SymMatrix,
    pub g: Vec<f64>,
    pub b: f64,
}

/// Standard-form problem over one block-diagonal psd variable and `q`
/// nonnegative scalars. Cone blocks are contiguous and listed by size.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProblem {
    blocks: Vec<usize>,
    q: usize,
    c_mat: SymMatrix,
    c_vec: Vec<f64>,
    constraints: Vec<ConicConstraint>,
}

impl ConicProblem {
    pub fn new(blocks: Vec<usize>, q: usize) -> Self {
        let n = blocks.iter().sum();
        ConicProblem { blocks, q, c_mat: SymMatrix::zeros(n), c_vec: vec![0.0; q], constraints: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.c_mat.dim()
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn scalars(&self) -> usize {
        self.q
    }

    pub fn objective(&self) -> (&SymMatrix, &[f64]) {
        (&self.c_mat, &self.c_vec)
    }

    pub fn constraints(&self) -> &[ConicConstraint] {
        &self.constraints
    }

    pub fn set_objective(&mut self, c: SymMatrix, c_vec: Vec<f64>) -> Result<()> {
        self.check_matrix(&c)?;
        self.check_len(c_vec.len())?;
        self.c_mat = c;
        self.c_vec = c_vec;
        Ok(())
    }

    pub fn add_constraint(&mut self, a: SymMatrix, g: Vec<f64>, b: f64) -> Result<()> {
        self.check_matrix(&a)?;
        self.check_len(g.len())?;
        if !b.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.constraints.push(ConicConstraint { a, g, b });
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.q {
            return Err(Error::DimensionMismatch { expected: self.q, found: len });
        }
        Ok(())
    }

    fn check_matrix(&self, a: &SymMatrix) -> Result<()> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.dim() });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let owner = self.owners();
        for (i, j, v) in a.upper_entries() {
            if v != 0.0 && owner[i] != owner[j] {
                return Err(Error::NotBlockDiagonal { matrix: self.constraints.len(), row: i, col: j });
            }
        }
        Ok(())
    }

    fn owners(&self) -> Vec<usize> {
        self.blocks.iter().enumerate().flat_map(|(b, &s)| core::iter::repeat_n(b, s)).collect()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for &s in &self.blocks {
            off.push(acc);
            acc += s;
        }
        off
    }

    fn split(&self, a: &SymMatrix) -> Vec<Option<DenseMatrix>> {
        self.offsets()
            .iter()
            .zip(&self.blocks)
            .map(|(&o, &s)| {
                let idx: Vec<usize> = (o..o + s).collect();
                let sub = a.principal(&idx);
                if sub.max_abs() == 0.0 {
                    None
                } else {
                    Some(sub.to_dense())
                }
            })
            .collect()
    }

    fn join(&self, mats: &[DenseMatrix]) -> SymMatrix {
        let mut out = SymMatrix::zeros(self.dim());
        for ((&o, &s), m) in self.offsets().iter().zip(&self.blocks).zip(mats) {
            let idx: Vec<usize> = (o..o + s).collect();
            out.set_principal(&idx, &SymMatrix::from_dense_sym(m));
        }
        out
    }

    fn split_var(&self, x: &SymMatrix, u: &[f64]) -> Var {
        Var {
            mats: self.split(x).into_iter().zip(&self.blocks).map(|(m, &s)| m.unwrap_or_else(|| DenseMatrix::zeros(s, s))).collect(),
            vec: u.to_vec(),
        }
    }

    /// `Σ yᵢAᵢ` and `Σ yᵢgᵢ`.
    pub fn adjoint(&self, y: &[f64]) -> (SymMatrix, Vec<f64>) {
        let mut m = SymMatrix::zeros(self.dim());
        let mut v = vec![0.0; self.q];
        for (con, &yi) in self.constraints.iter().zip(y) {
            m.axpy(yi, &con.a);
            for (o, g) in v.iter_mut().zip(&con.g) {
                *o += yi * g;
            }
        }
        (m, v)
    }

    /// `(⟨Aᵢ, X⟩ + gᵢᵀu)ᵢ`.
    pub fn apply(&self, x: &SymMatrix, u: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.a.dot(x) + dot(&c.g, u)).collect()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.b).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    SlowProgress,
}

/// Residuals recomputed against the original problem data.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Residuals {
    /// `‖b − A(X) − Gu‖₂`.
    pub primal: f64,
    /// `‖C − Aᵀy − Z‖_F` together with the scalar part.
    pub dual: f64,
    /// `|⟨C,X⟩ + cᵀu − bᵀy|`.
    pub gap: f64,
    pub min_eig_x: f64,
    pub min_eig_z: f64,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: SymMatrix,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub z: SymMatrix,
    pub w: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    /// Residual of the improving ray for the infeasible statuses.
    pub certificate_residual: f64,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Scale factors of the residual contract.
pub(crate) struct ContractScale {
    pub b: f64,
    pub c: f64,
}

impl ContractScale {
    pub fn of(prob: &ConicProblem) -> Result<Self> {
        let c_norm = if prob.dim() > 0 { operator_norm(&prob.c_mat)? } else { 0.0 };
        let c_vec = prob.c_vec.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(ContractScale { b: norm2(&prob.rhs()), c: c_norm.max(c_vec) })
    }
}

/// True iff `res` meets the optimality contract.
pub fn meets_contract(prob: &ConicProblem, res: &Residuals, primal_objective: f64, settings: &SolverSettings) -> bool {
    let scale = match ContractScale::of(prob) {
        Ok(s) => s,
        Err(_) => return false,
    };
    res.primal <= settings.tol_primal * (1.0 + scale.b)
        && res.dual <= settings.tol_dual * (1.0 + scale.c)
        && res.gap <= settings.tol_gap * (1.0 + primal_objective.abs())
        && res.min_eig_x >= -settings.tol_psd
        && res.min_eig_z >= -settings.tol_psd
}

/// Recomputes the contract residuals of a primal-dual pair.
pub fn residuals(prob: &ConicProblem, x: &SymMatrix, u: &[f64], y: &[f64], z: &SymMatrix, w: &[f64]) -> Result<Residuals> {
    let ax = prob.apply(x, u);
    let rp: Vec<f64> = prob.rhs().iter().zip(&ax).map(|(b, a)| b - a).collect();
    let (aty, gty) = prob.adjoint(y);
    let rd = prob.c_mat.sub(&aty).sub(z);
    let rdw: f64 = prob.c_vec.iter().zip(&gty).zip(w).map(|((c, g), w)| (c - g - w) * (c - g - w)).sum();
    let pobj = prob.c_mat.dot(x) + dot(&prob.c_vec, u);
    let dobj = dot(&prob.rhs(), y);
    let min_scalar = |v: &[f64]| v.iter().fold(f64::INFINITY, |m, &a| m.min(a));
    Ok(Residuals {
        primal: norm2(&rp),
        dual: (rd.frobenius_norm().powi(2) + rdw).sqrt(),
        gap: (pobj - dobj).abs(),
        min_eig_x: min_eigenvalue(x)?.min(min_scalar(u)),
        min_eig_z: min_eigenvalue(z)?.min(min_scalar(w)),
    })
}

/// Result of preprocessing: the reduced, row-normalized problem and the map
/// back to the original multipliers.
pub(crate) struct Reduced {
    pub data: BlockedData,
    /// Original row index and scale for every kept row.
    pub kept: Vec<(usize, f64)>,
    pub m_original: usize,
}

impl Reduced {
    pub fn expand_y(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m_original];
        for (&(i, s), &v) in self.kept.iter().zip(y) {
            out[i] = v / s;
        }
        out
    }
}

/// Either a reduced problem or an immediate infeasibility certificate from
/// inconsistent dependent rows.
pub(crate) enum Preprocessed {
    Ready(Reduced),
    Inconsistent(Vec<f64>),
}

/// Normalizes every row and drops linearly dependent ones, checking that
/// their right-hand sides are consistent.
pub(crate) fn preprocess(prob: &ConicProblem) -> Preprocessed {
    let m = prob.constraints.len();
    let vectors: Vec<Vec<f64>> = prob
        .constraints
        .iter()
        .map(|c| {
            let mut v: Vec<f64> = Vec::new();
            for blk in prob.split(&c.a).iter().zip(&prob.blocks) {
                match blk {
                    (Some(d), _) => v.extend(SymMatrix::from_dense_sym(d).svec()),
                    (None, &s) => v.extend(core::iter::repeat_n(0.0, s * (s + 1) / 2)),
                }
            }
            v.extend_from_slice(&c.g);
            v
        })
        .collect();

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped: Vec<usize> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let nv = norm2(v);
        if nv == 0.0 {
            dropped.push(i);
            continue;
        }
        let mut r: Vec<f64> = v.iter().map(|x| x / nv).collect();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&r, q);
                r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let nr = norm2(&r);
        if nr > 1e-10 {
            r.iter_mut().for_each(|a| *a /= nr);
            basis.push(r);
            kept.push(i);
        } else {
            dropped.push(i);
        }
    }

    // consistency of dropped rows: v_i = Σ c_k v_k must give b_i = Σ c_k b_k
    if !dropped.is_empty() {
        let dim = vectors.first().map_or(0, Vec::len);
        let cols: Vec<Vec<f64>> = kept.iter().map(|&k| vectors[k].clone()).collect();
        let kmat = DenseMatrix::from_columns(dim, &cols);
        for &i in &dropped {
            let coef = if kept.is_empty() { Vec::new() } else { crate::symcore::linalg::pseudo_solve(&kmat, &vectors[i], 1e-12) };
            let implied: f64 = kept.iter().zip(&coef).map(|(&k, c)| c * prob.constraints[k].b).sum();
            let bi = prob.constraints[i].b;
            let scale = 1.0 + bi.abs() + kept.iter().zip(&coef).map(|(&k, c)| (c * prob.constraints[k].b).abs()).sum::<f64>();
            if (bi - implied).abs() > 1e-9 * scale {
                // y = e_i − Σ c_k e_k has Aᵀy = 0 and bᵀy = b_i − implied
                let mut y = vec![0.0; m];
                y[i] = 1.0;
                for (&k, c) in kept.iter().zip(&coef) {
                    y[k] -= c;
                }
                let s = bi - implied;
                y.iter_mut().for_each(|v| *v /= s);
                return Preprocessed::Inconsistent(y);
            }
        }
    }

    let rows: Vec<Row> = kept
        .iter()
        .map(|&k| {
            let s = norm2(&vectors[k]);
            let c = &prob.constraints[k];
            Row {
                blocks: prob
                    .split(&c.a)
                    .into_iter()
                    .map(|o| {
                        o.map(|mut d| {
                            for i in 0..d.rows() {
                                for j in 0..d.cols() {
                                    d[(i, j)] /= s;
                                }
                            }
                            d
                        })
                    })
                    .collect(),
                g: c.g.iter().map(|g| g / s).collect(),
            }
        })
        .collect();
    let scales: Vec<f64> = kept.iter().map(|&k| norm2(&vectors[k])).collect();
    let data = BlockedData {
        sizes: prob.blocks.clone(),
        q: prob.q,
        c: prob.split_var(&prob.c_mat, &prob.c_vec),
        rows,
        b: kept.iter().zip(&scales).map(|(&k, s)| prob.constraints[k].b / s).collect(),
    };
    Preprocessed::Ready(Reduced { data, kept: kept.into_iter().zip(scales).collect(), m_original: m })
}

/// Raw back-end output in block-split form.
pub(crate) struct BackendOutput {
    pub status: SolveStatus,
    pub x: Var,
    pub y: Vec<f64>,
    pub z: Var,
    pub iterations: usize,
}

/// Solves `prob` with the configured back end.
pub fn solve(prob: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
    let m = prob.constraints.len();
    let reduced = match preprocess(prob) {
        Preprocessed::Ready(r) => r,
        Preprocessed::Inconsistent(y) => return Ok(primal_infeasible(prob, y, 0)),
    };
    let out = match settings.algorithm {
        Algorithm::InteriorPoint => ipm::solve(&reduced.data, settings),
        Algorithm::Admm => admm::solve(&reduced.data, settings),
    };
    let y = reduced.expand_y(&out.y);
    debug_assert_eq!(y.len(), m);
    match out.status {
        SolveStatus::PrimalInfeasible => Ok(primal_infeasible(prob, y, out.iterations)),
        SolveStatus::DualInfeasible => dual_infeasible(prob, &out.x, out.iterations),
        status => {
            let x = prob.join(&out.x.mats);
            let z = prob.join(&out.z.mats);
            let (u, w) = (out.x.vec, out.z.vec);
            let res = residuals(prob, &x, &u, &y, &z, &w)?;
            let pobj = prob.c_mat.dot(&x) + dot(&prob.c_vec, &u);
            let dobj = dot(&prob.rhs(), &y);
            let status = if meets_contract(prob, &res, pobj, settings) { SolveStatus::Optimal } else { status.min_slow() };
            Ok(ConicSolution {
                status,
                x,
                u,
                y,
                z,
                w,
                primal_objective: pobj,
                dual_objective: dobj,
                residuals: res,
                certificate_residual: 0.0,
                iterations: out.iterations,
            })
        }
    }
}

impl SolveStatus {
    fn min_slow(self) -> SolveStatus {
        match self {
            SolveStatus::Optimal => SolveStatus::SlowProgress,
            s => s,
        }
    }
}

/// Residual of a primal infeasibility certificate: `bᵀy = 1` is enforced by
/// scaling, and the reported number is the positive part of `Σ yᵢAᵢ` and `Σ yᵢgᵢ`.
pub fn primal_certificate_residual(prob: &ConicProblem, y: &[f64]) -> Result<f64> {
    let (aty, gty) = prob.adjoint(y);
    let mut worst = 0.0f64;
    if prob.dim() > 0 {
        worst = worst.max(-min_eigenvalue(&aty.scaled(-1.0))?);
    }
    for v in gty {
        worst = worst.max(v);
    }
    Ok(worst.max(0.0))
}

fn primal_infeasible(prob: &ConicProblem, y: Vec<f64>, iterations: usize) -> ConicSolution {
    let by = dot(&prob.rhs(), &y);
    let y: Vec<f64> = if by > 0.0 { y.iter().map(|v| v / by).collect() } else { y };
    let cert = primal_certificate_residual(prob, &y).unwrap_or(f64::INFINITY);
    ConicSolution {
        status: SolveStatus::PrimalInfeasible,
        x: SymMatrix::zeros(prob.dim()),
        u: vec![0.0; prob.q],
        y,
        z: SymMatrix::zeros(prob.dim()),
        w: vec![0.0; prob.q],
        primal_objective: f64::INFINITY,
        dual_objective: f64::INFINITY,
        residuals: Residuals::default(),
        certificate_residual: cert,
        iterations,
    }
}

/// Ray `X ⪰ 0, u ≥ 0` with `A(X) + Gu = 0` and `⟨C,X⟩ + cᵀu = −1`; polished
/// by a least-squares projection onto the homogeneous equations.
fn dual_infeasible(prob: &ConicProblem, ray: &Var, iterations: usize) -> Result<ConicSolution> {
    let mut x = prob.join(&ray.mats);
    let mut u = ray.vec.clone();
    let obj = prob.c_mat.dot(&x) + dot(&prob.c_vec, &u);
    if obj < 0.0 {
        x.scale(-1.0 / obj);
        u.iter_mut().for_each(|v| *v /= -obj);
    }
    let polished = polish_ray(prob, &x, &u);
    let (x, u) = match polished {
        Some(p) => p,
        None => (x, u),
    };
    let cert = dual_certificate_residual(prob, &x, &u)?;
    let pobj = prob.c_mat.dot(&x) + dot(&prob.c_vec, &u);
    Ok(ConicSolution {
        status: SolveStatus::DualInfeasible,
        x,
        u,
        y: vec![0.0; prob.constraints.len()],
        z: SymMatrix::zeros(prob.dim()),
        w: vec![0.0; prob.q],
        primal_objective: pobj,
        dual_objective: f64::NEG_INFINITY,
        residuals: Residuals::default(),
        certificate_residual: cert,
        iterations,
    })
}

/// `max(‖A(X) + Gu‖, |⟨C,X⟩ + cᵀu + 1|, −λ_min)` for a normalized ray.
pub fn dual_certificate_residual(prob: &ConicProblem, x: &SymMatrix, u: &[f64]) -> Result<f64> {
    let ax = norm2(&prob.apply(x, u));
    let obj = prob.c_mat.dot(x) + dot(&prob.c_vec, u);
    let lmin = if prob.dim() > 0 { min_eigenvalue(x)? } else { 0.0 };
    let umin = u.iter().fold(0.0f64, |m, &v| m.min(v));
    Ok(ax.max((obj + 1.0).abs()).max(-lmin).max(-umin))
}

fn polish_ray(prob: &ConicProblem, x: &SymMatrix, u: &[f64]) -> Option<(SymMatrix, Vec<f64>)> {
    let before = dual_certificate_residual(prob, x, u).ok()?;
    // rows: constraints plus the objective normalization
    let mut rows: Vec<Vec<f64>> = prob.constraints.iter().map(|c| svec_full(&c.a, &c.g)).collect();
    rows.push(svec_full(&prob.c_mat, &prob.c_vec));
    let xv = svec_full(x, u);
    let mut target: Vec<f64> = vec![0.0; prob.constraints.len()];
    target.push(-1.0);
    let r: Vec<f64> = rows.iter().zip(&target).map(|(row, t)| t - dot(row, &xv)).collect();
    let dim = xv.len();
    let mat = DenseMatrix::from_row_major(rows.len(), dim, rows.concat());
    let delta = crate::symcore::linalg::pseudo_solve(&mat, &r, 1e-12);
    let nv: Vec<f64> = xv.iter().zip(&delta).map(|(a, d)| a + d).collect();
    let n = prob.dim();
    let split = n * (n + 1) / 2;
    let nx = SymMatrix::smat(n, &nv[..split]);
    let nu = nv[split..].to_vec();
    let after = dual_certificate_residual(prob, &nx, &nu).ok()?;
    if after <= before {
        Some((nx, nu))
    } else {
        None
    }
}

fn svec_full(a: &SymMatrix, g: &[f64]) -> Vec<f64> {
    let mut v = a.svec();
    v.extend_from_slice(g);
    v
}

/// Output of [`solve_alt_pair`].
#[derive(Clone, Debug)]
pub struct AltPairSolution {
    /// Common optimal value of the bounded alternative program.
    pub eta: f64,
    /// Optimal `X` of the trace-bounded program (`tr X ≤ 1`), in the pencil's
    /// own index order.
    pub x: SymMatrix,
    /// Best `y` of the relaxation program `inf {η : A(y) + ηI ⪰ 0, η ≥ 0}`.
    pub y: Vec<f64>,
    /// `η` attained by `y` (dual side).
    pub eta_dual: f64,
    pub solution: ConicSolution,
}

/// Builds the trace-bounded alternative program of a pencil in canonical
/// (contiguous) block order. Returns the problem and the permutation
/// `perm[new] = old` used.
pub fn alt_program(p: &Pencil) -> (ConicProblem, Vec<usize>) {
    let part = p.partition();
    let perm = part.canonical_permutation();
    let mut prob = ConicProblem::new(part.sizes(), 1);
    prob.set_objective(p.a0().permuted(&perm), vec![0.0]).expect("pencil matrices are block diagonal");
    for a in p.coefficients() {
        prob.add_constraint(a.permuted(&perm), vec![0.0], 0.0).expect("pencil matrices are block diagonal");
    }
    prob.add_constraint(SymMatrix::identity(p.n()), vec![1.0], 1.0).expect("identity is block diagonal");
    (prob, perm)
}

/// Solves the primal-dual pair
/// `inf {η : A(y) + ηI ⪰ 0, η ≥ 0}` / `sup {−⟨A₀,X⟩ : ⟨Aᵢ,X⟩ = 0, tr X ≤ 1, X ⪰ 0}`.
pub fn solve_alt_pair(p: &Pencil, settings: &SolverSettings) -> Result<AltPairSolution> {
    let m = p.m();
    if p.is_empty() {
        return Ok(AltPairSolution {
            eta: 0.0,
            x: SymMatrix::zeros(0),
            y: vec![0.0; m],
            eta_dual: 0.0,
            solution: ConicSolution {
                status: SolveStatus::Optimal,
                x: SymMatrix::zeros(0),
                u: vec![1.0],
                y: vec![0.0; m + 1],
                z: SymMatrix::zeros(0),
                w: vec![0.0],
                primal_objective: 0.0,
                dual_objective: 0.0,
                residuals: Residuals::default(),
                certificate_residual: 0.0,
                iterations: 0,
            },
        });
    }
    let (prob, perm) = alt_program(p);
    let sol = solve(&prob, settings)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver { status: sol.status, iterations: sol.iterations });
    }
    // undo the canonical relabelling
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let x = sol.x.permuted(&inverse);
    let eta_dual = -sol.y[m];
    Ok(AltPairSolution { eta: -sol.primal_objective, x, y: sol.y[..m].to_vec(), eta_dual, solution: sol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::gen_blocklinear;
    use crate::symcore::BlockIndexSet;

    #[test]
    fn trace_normalization() {
        let mut prob = ConicProblem::new(vec![2], 0);
        prob.set_objective(SymMatrix::identity(2), vec![]).unwrap();
        prob.add_constraint(SymMatrix::identity(2), vec![], 1.0).unwrap();
        let sol = solve(&prob, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn blocklinear_alternative_value() {
        let sol = solve_alt_pair(&gen_blocklinear(), &SolverSettings::default()).unwrap();
        assert!((sol.eta - 1.0).abs() < 1e-7, "eta = {}", sol.eta);
        let expect = [0.5, 0.0, 0.0, 0.5];
        for (i, e) in expect.iter().enumerate() {
            assert!((sol.x[(i, i)] - e).abs() < 1e-6, "{:?}", sol.x);
        }
    }

    #[test]
    fn splitting_backend_agrees_with_interior_point() {
        let ipm = SolverSettings::default();
        let admm = SolverSettings { algorithm: Algorithm::Admm, ..SolverSettings::default() };
        for p in [gen_blocklinear(), crate::recovery::gen_blocksdp(0.5)] {
            let (prob, _) = alt_program(&p);
            let a = solve(&prob, &ipm).unwrap();
            let b = solve(&prob, &admm).unwrap();
            assert_eq!(b.status, SolveStatus::Optimal, "{:?}", b.residuals);
            assert!(meets_contract(&prob, &b.residuals, b.primal_objective, &admm));
            assert!((a.primal_objective - b.primal_objective).abs() < 1e-6, "{} vs {}", a.primal_objective, b.primal_objective);
        }
    }

    #[test]
    fn single_weakly_feasible_block_has_value_zero() {
        let p = gen_blocklinear().subsystem(&BlockIndexSet::from_labels([1])).unwrap();
        let sol = solve_alt_pair(&p, &SolverSettings::default()).unwrap();
        assert!(sol.eta.abs() < 1e-9, "eta = {}", sol.eta);
    }

    #[test]
    fn inconsistent_dependent_rows_are_infeasible() {
        let mut prob = ConicProblem::new(vec![1], 0);
        prob.add_constraint(SymMatrix::identity(1), vec![], 1.0).unwrap();
        prob.add_constraint(SymMatrix::identity(1).scaled(2.0), vec![], 1.0).unwrap();
        let sol = solve(&prob, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
        assert!(sol.certificate_residual <= 1e-12);
    }

    #[test]
    fn unbounded_problem_reports_ray() {
        let mut prob = ConicProblem::new(vec![1], 0);
        prob.set_objective(SymMatrix::from_diag(&[-1.0]), vec![]).unwrap();
        let sol = solve(&prob, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::DualInfeasible);
        assert!(sol.certificate_residual <= 1e-6);
        assert!((sol.x[(0, 0)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_problem_reports_certificate() {
        // X ⪰ 0 with tr X = -1
        let mut prob = ConicProblem::new(vec![2], 0);
        prob.add_constraint(SymMatrix::identity(2), vec![], -1.0).unwrap();
        let sol = solve(&prob, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
        assert!(sol.certificate_residual <= 1e-6);
    }

    #[test]
    fn rejects_off_block_objective() {
        let mut prob = ConicProblem::new(vec![1, 1], 0);
        let mut c = SymMatrix::zeros(2);
        c[(0, 1)] = 1.0;
        assert!(prob.set_objective(c, vec![]).is_err());
    }
}
