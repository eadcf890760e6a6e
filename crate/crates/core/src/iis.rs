//! Irreducible infeasible block subsystems.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::altsys::{clean, is_extreme, purify, restricted_alt, AltPoint, FeasibilityStatus, Verdict};
use crate::error::{Error, Result};
use crate::pencil::Pencil;
use crate::sdpsolve::{solve, ConicProblem, SolveStatus, SolverSettings};
use crate::symcore::{extract_block, operator_norm, BlockIndexSet, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Greedy,
    L21,
    BruteForce,
}

/// Verdict on one block subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetVerdict {
    pub set: BlockIndexSet,
    pub verdict: Verdict,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IisResult {
    pub set: BlockIndexSet,
    /// Member of `S(Σ)` supported inside `set`.
    pub certificate: AltPoint,
    /// Whether `certificate` was purified to an extreme point.
    pub certificate_extreme: bool,
    /// Verdicts of every checked proper subset, one-deletion subsets first.
    pub verification: Vec<SubsetVerdict>,
    pub method: Method,
}

/// Why a candidate set is not an IIS.
#[derive(Clone, Debug, PartialEq)]
pub enum Refutation {
    /// The subsystem on the set is weakly feasible.
    Feasible { eta: f64 },
    /// A proper subset is still weakly infeasible.
    Reducible { subset: BlockIndexSet, certificate: AltPoint },
}

#[derive(Clone, Debug, PartialEq)]
pub enum IisCheck {
    Verified(IisResult),
    Refuted(Refutation),
}

impl IisCheck {
    pub fn is_verified(&self) -> bool {
        matches!(self, IisCheck::Verified(_))
    }
}

fn certificate_of(status: FeasibilityStatus) -> Result<AltPoint> {
    status.certificate.ok_or_else(|| Error::Indeterminate("infeasible verdict without certificate".into()))
}

/// Purifies when possible; falls back to the raw point.
fn canonical_certificate(p: &Pencil, cert: AltPoint, settings: &SolverSettings) -> (AltPoint, bool) {
    match purify(p, &cert, settings) {
        Ok(x) if x.support().is_subset(cert.support()) => (x, true),
        _ => (cert, false),
    }
}

/// Checks that `set` is weakly infeasible and every proper subset is weakly
/// feasible: all one-block deletions, and every proper subset when
/// `|set| ≤ full_subset_limit`.
pub fn verify_iis(p: &Pencil, set: &BlockIndexSet, settings: &SolverSettings) -> Result<IisCheck> {
    set.validate(p.partition())?;
    let st = restricted_alt(p, set, settings)?;
    if st.is_feasible() {
        return Ok(IisCheck::Refuted(Refutation::Feasible { eta: st.eta_opt }));
    }
    let cert = certificate_of(st)?;
    let mut verification = Vec::new();
    let check = |sub: BlockIndexSet, verification: &mut Vec<SubsetVerdict>| -> Result<Option<Refutation>> {
        let st = restricted_alt(p, &sub, settings)?;
        verification.push(SubsetVerdict { set: sub.clone(), verdict: st.verdict, eta: st.eta_opt });
        if st.is_infeasible() {
            return Ok(Some(Refutation::Reducible { subset: sub, certificate: certificate_of(st)? }));
        }
        Ok(None)
    };
    for i in set.iter() {
        if let Some(r) = check(set.without(i), &mut verification)? {
            return Ok(IisCheck::Refuted(r));
        }
    }
    let size = set.len();
    if size >= 3 && size <= settings.full_subset_limit {
        for mask in 1..(1u64 << size) - 1 {
            if mask.count_ones() as usize >= size - 1 {
                continue;
            }
            if let Some(r) = check(set.subset_by_mask(mask), &mut verification)? {
                return Ok(IisCheck::Refuted(r));
            }
        }
    }
    let (certificate, certificate_extreme) = canonical_certificate(p, cert, settings);
    Ok(IisCheck::Verified(IisResult { set: set.clone(), certificate, certificate_extreme, verification, method: Method::Greedy }))
}

fn verified(p: &Pencil, set: &BlockIndexSet, method: Method, settings: &SolverSettings) -> Result<IisResult> {
    match verify_iis(p, set, settings)? {
        IisCheck::Verified(mut r) => {
            r.method = method;
            Ok(r)
        }
        IisCheck::Refuted(r) => Err(Error::Indeterminate(format!("set {set} failed verification: {r:?}"))),
    }
}

/// Deletion filter in ascending block order. A block that is weakly
/// infeasible on its own is returned directly as a singleton IIS.
pub fn greedy_iis(p: &Pencil, settings: &SolverSettings) -> Result<IisResult> {
    let all = BlockIndexSet::full(p.k());
    if !restricted_alt(p, &all, settings)?.is_infeasible() {
        return Err(Error::NotInfeasible);
    }
    for (b, st) in p.check_assumption_nontrivial(settings)?.iter().enumerate() {
        if st.is_infeasible() {
            return verified(p, &BlockIndexSet::new([b]), Method::Greedy, settings);
        }
    }
    let mut set = all;
    for b in 0..p.k() {
        let candidate = set.without(b);
        if restricted_alt(p, &candidate, settings)?.is_infeasible() {
            set = candidate;
        }
    }
    verified(p, &set, Method::Greedy, settings)
}

/// Smallest-cardinality block support of a member of `S(Σ)`, by enumeration
/// in order of increasing size.
pub fn min_support_bruteforce(p: &Pencil, settings: &SolverSettings) -> Result<(BlockIndexSet, AltPoint)> {
    let k = p.k();
    if k > settings.brute_force_limit {
        return Err(Error::Guard(format!("{k} blocks exceed the brute-force limit {}", settings.brute_force_limit)));
    }
    let all = BlockIndexSet::full(k);
    for size in 1..=k {
        for mask in 1u64..(1u64 << k) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let set = all.subset_by_mask(mask);
            let st = restricted_alt(p, &set, settings)?;
            if st.is_infeasible() {
                return Ok((set, certificate_of(st)?));
            }
        }
    }
    Err(Error::NotInfeasible)
}

/// Extreme point of `S(Σ)` with block support exactly the IIS.
pub fn iis_to_extreme(p: &Pencil, iis: &IisResult, settings: &SolverSettings) -> Result<AltPoint> {
    let st = restricted_alt(p, &iis.set, settings)?;
    if !st.is_infeasible() {
        return Err(Error::NotInfeasible);
    }
    let x = purify(p, &certificate_of(st)?, settings)?;
    if !is_extreme(p, &x, settings)?.is_extreme() {
        return Err(Error::Indeterminate("purified point failed the extremality test".into()));
    }
    if x.support() != &iis.set {
        return Err(Error::SupportMismatch { expected: iis.set.clone(), found: x.support().clone() });
    }
    Ok(x)
}

/// Per-block norm used by [`min_support_l21`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BlockNorm {
    #[default]
    Frobenius,
    Operator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct L21Solution {
    pub point: AltPoint,
    /// `Σ_B ‖X_B‖` in the chosen norm, recomputed from `point`.
    pub objective: f64,
    pub norm: BlockNorm,
}

/// Minimizes the sum of per-block norms over `S(Σ)`.
pub fn min_support_l21(p: &Pencil, norm: BlockNorm, settings: &SolverSettings) -> Result<L21Solution> {
    let part = p.partition();
    let k = p.k();
    let sizes = part.sizes();
    let extra: Vec<usize> = match norm {
        BlockNorm::Frobenius => sizes.iter().map(|s| s * (s + 1) / 2 + 1).collect(),
        BlockNorm::Operator => sizes.clone(),
    };
    let q = if norm == BlockNorm::Operator { k } else { 0 };
    let mut cone = sizes.clone();
    cone.extend_from_slice(&extra);
    let total: usize = cone.iter().sum();
    let mut offsets = Vec::with_capacity(cone.len());
    let mut acc = 0;
    for &s in &cone {
        offsets.push(acc);
        acc += s;
    }
    let perm = part.canonical_permutation();
    let mut prob = ConicProblem::new(cone, q);

    let embed = |a: &SymMatrix| {
        let mut out = SymMatrix::zeros(total);
        let pa = a.permuted(&perm);
        for (i, j, v) in pa.upper_entries() {
            out[(i, j)] = v;
        }
        out
    };
    // coefficient c on the (i,j) entry of the variable, counted once
    let entry = |i: usize, j: usize, c: f64| {
        let mut m = SymMatrix::zeros(total);
        m[(i, j)] = if i == j { c } else { 0.5 * c };
        m
    };

    let mut objective = SymMatrix::zeros(total);
    let mut c_vec = vec![0.0; q];
    for b in 0..k {
        let (xo, n_b) = (offsets[b], sizes[b]);
        let eo = offsets[k + b];
        match norm {
            BlockNorm::Frobenius => {
                let d = n_b * (n_b + 1) / 2;
                let t = eo + d;
                objective[(t, t)] = 1.0;
                let mut kk = 0;
                for i in 0..n_b {
                    for j in i..n_b {
                        let scale = if i == j { 1.0 } else { core::f64::consts::SQRT_2 };
                        let mut m = entry(eo + kk, t, 1.0);
                        m.axpy(1.0, &entry(xo + i, xo + j, -scale));
                        prob.add_constraint(m, vec![0.0; q], 0.0)?;
                        kk += 1;
                    }
                }
                for i in 0..d {
                    let mut m = entry(eo + i, eo + i, 1.0);
                    m.axpy(1.0, &entry(t, t, -1.0));
                    prob.add_constraint(m, vec![0.0; q], 0.0)?;
                    for j in (i + 1)..d {
                        prob.add_constraint(entry(eo + i, eo + j, 1.0), vec![0.0; q], 0.0)?;
                    }
                }
            }
            BlockNorm::Operator => {
                // W_B + X_B − t_B I = 0
                c_vec[b] = 1.0;
                for i in 0..n_b {
                    for j in i..n_b {
                        let mut m = entry(xo + i, xo + j, 1.0);
                        m.axpy(1.0, &entry(eo + i, eo + j, 1.0));
                        let mut g = vec![0.0; q];
                        if i == j {
                            g[b] = -1.0;
                        }
                        prob.add_constraint(m, g, 0.0)?;
                    }
                }
            }
        }
    }
    prob.set_objective(objective, c_vec)?;
    for a in p.coefficients() {
        prob.add_constraint(embed(a), vec![0.0; q], 0.0)?;
    }
    prob.add_constraint(embed(p.a0()), vec![0.0; q], -1.0)?;

    let sol = solve(&prob, settings)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::PrimalInfeasible => return Err(Error::NotInfeasible),
        status => return Err(Error::Solver { status, iterations: sol.iterations }),
    }
    let n = p.n();
    let idx: Vec<usize> = (0..n).collect();
    let x_canon = sol.x.principal(&idx);
    let mut inverse = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let x = clean(p, &x_canon.permuted(&inverse), settings)?;
    let point = AltPoint::new(p, x, settings)?;
    let objective = group_norm(p, point.x(), norm)?;
    Ok(L21Solution { point, objective, norm })
}

/// `Σ_B ‖X_B‖` in the requested norm.
pub fn group_norm(p: &Pencil, x: &SymMatrix, norm: BlockNorm) -> Result<f64> {
    let mut s = 0.0;
    for b in 0..p.k() {
        let blk = extract_block(x, p.partition(), b)?;
        s += match norm {
            BlockNorm::Frobenius => blk.frobenius_norm(),
            BlockNorm::Operator => operator_norm(&blk)?,
        };
    }
    Ok(s.abs())
}
