//! Linear matrix pencils `A(y) = A₀ − Σ yᵢ Aᵢ` in block-diagonal form.

use alloc::vec;
use alloc::vec::Vec;

use crate::altsys::{classify, FeasibilityStatus};
use crate::error::{Error, Result};
use crate::sdpsolve::SolverSettings;
use crate::symcore::{first_off_block_entry, BlockPartition, SymMatrix};

pub use crate::symcore::BlockIndexSet;

/// The system `Σ: A(y) ⪰ 0` together with its declared block structure.
///
/// Every matrix is exactly zero outside the diagonal blocks; construction
/// rejects anything else rather than projecting it away.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    a0: SymMatrix,
    a: Vec<SymMatrix>,
    part: BlockPartition,
}

impl Pencil {
    pub fn new(a0: SymMatrix, a: Vec<SymMatrix>, part: BlockPartition) -> Result<Self> {
        let n = part.n();
        for (idx, m) in core::iter::once(&a0).chain(a.iter()).enumerate() {
            if m.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
            }
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
            if let Some((row, col)) = first_off_block_entry(m, &part, 0.0)? {
                return Err(Error::NotBlockDiagonal { matrix: idx, row, col });
            }
        }
        if n > 0 && part.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        Ok(Pencil { a0, a, part })
    }

    /// The 0-dimensional pencil over `m` variables; feasible by convention.
    pub fn empty(m: usize) -> Self {
        Pencil {
            a0: SymMatrix::zeros(0),
            a: vec![SymMatrix::zeros(0); m],
            part: BlockPartition::new(0, Vec::new()).expect("empty partition"),
        }
    }

    pub fn n(&self) -> usize {
        self.part.n()
    }

    /// Number of variables `m`.
    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// Number of blocks `k`.
    pub fn k(&self) -> usize {
        self.part.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n() == 0
    }

    pub fn a0(&self) -> &SymMatrix {
        &self.a0
    }

    /// `A₁, …, A_m`.
    pub fn coefficients(&self) -> &[SymMatrix] {
        &self.a
    }

    /// `A₀, A₁, …, A_m`.
    pub fn matrices(&self) -> impl Iterator<Item = &SymMatrix> {
        core::iter::once(&self.a0).chain(self.a.iter())
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.part
    }

    /// `A(y) = A₀ − Σ yᵢ Aᵢ`.
    pub fn evaluate(&self, y: &[f64]) -> Result<SymMatrix> {
        if y.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), found: y.len() });
        }
        let mut out = self.a0.clone();
        for (yi, ai) in y.iter().zip(&self.a) {
            if *yi != 0.0 {
                out.axpy(-yi, ai);
            }
        }
        Ok(out)
    }

    /// Block subsystem on `B(I)`, renumbered to `0..|B(I)|`.
    pub fn subsystem(&self, set: &BlockIndexSet) -> Result<Pencil> {
        set.validate(&self.part)?;
        if set.is_empty() {
            return Ok(Pencil::empty(self.m()));
        }
        let rows = self.part.union(set);
        Ok(Pencil {
            a0: self.a0.principal(&rows),
            a: self.a.iter().map(|m| m.principal(&rows)).collect(),
            part: self.part.restrict(set),
        })
    }

    /// Embeds a matrix living on `B(I)` into the full dimension, zero elsewhere.
    pub fn lift(&self, set: &BlockIndexSet, sub: &SymMatrix) -> Result<SymMatrix> {
        let rows = self.part.union(set);
        if sub.dim() != rows.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: sub.dim() });
        }
        let mut full = SymMatrix::zeros(self.n());
        full.set_principal(&rows, sub);
        Ok(full)
    }

    /// Single-block classification of every block.
    pub fn check_assumption_nontrivial(&self, settings: &SolverSettings) -> Result<Vec<FeasibilityStatus>> {
        (0..self.k()).map(|b| classify(&self.subsystem(&BlockIndexSet::new([b]))?, settings)).collect()
    }

    /// Blocks that are weakly infeasible on their own.
    pub fn trivially_infeasible_blocks(&self, settings: &SolverSettings) -> Result<BlockIndexSet> {
        let statuses = self.check_assumption_nontrivial(settings)?;
        Ok(statuses.iter().enumerate().filter(|(_, s)| s.is_infeasible()).map(|(b, _)| b).collect())
    }

    /// Relabels rows by `perm[new] = old`; the partition follows.
    pub fn permuted(&self, perm: &[usize]) -> Result<Pencil> {
        if perm.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: perm.len() });
        }
        let mut inverse = vec![usize::MAX; self.n()];
        for (new, &old) in perm.iter().enumerate() {
            if old >= self.n() || inverse[old] != usize::MAX {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            inverse[old] = new;
        }
        let blocks = self.part.blocks().iter().map(|b| b.iter().map(|&i| inverse[i]).collect()).collect();
        Pencil::new(
            self.a0.permuted(perm),
            self.a.iter().map(|m| m.permuted(perm)).collect(),
            BlockPartition::new(self.n(), blocks)?,
        )
    }
}

/// Halfplane `α y₁ + β y₂ + γ ≥ 0` as a 1×1 pencil over `y ∈ ℝ²`.
pub fn build_halfplane(alpha: f64, beta: f64, gamma: f64) -> Pencil {
    Pencil::new(
        SymMatrix::from_diag(&[gamma]),
        vec![SymMatrix::from_diag(&[-alpha]), SymMatrix::from_diag(&[-beta])],
        BlockPartition::singletons(1),
    )
    .expect("1x1 pencil is well formed")
}

/// Disc `‖y − c‖₂ ≤ r` as the 2×2 pencil
/// `[[r + c₁ − y₁, y₂ − c₂], [y₂ − c₂, r − c₁ + y₁]]`.
pub fn build_disc(r: f64, c: [f64; 2]) -> Result<Pencil> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("disc radius must be positive, got {r}")));
    }
    let mut a0 = SymMatrix::zeros(2);
    a0[(0, 0)] = r + c[0];
    a0[(1, 1)] = r - c[0];
    a0[(0, 1)] = -c[1];
    let a1 = SymMatrix::from_diag(&[1.0, -1.0]);
    let mut a2 = SymMatrix::zeros(2);
    a2[(0, 1)] = -1.0;
    Pencil::new(a0, vec![a1, a2], BlockPartition::from_sizes(&[2])?)
}

/// Block-diagonal concatenation over a shared variable space.
pub fn concat_blocks(parts: &[Pencil]) -> Result<Pencil> {
    let first = parts.first().ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
    let m = first.m();
    let n: usize = parts.iter().map(Pencil::n).sum();
    let mut a0 = SymMatrix::zeros(n);
    let mut a = vec![SymMatrix::zeros(n); m];
    let mut blocks = Vec::new();
    let mut offset = 0;
    for p in parts {
        if p.m() != m {
            return Err(Error::DimensionMismatch { expected: m, found: p.m() });
        }
        let rows: Vec<usize> = (offset..offset + p.n()).collect();
        a0.set_principal(&rows, &p.a0);
        for (dst, src) in a.iter_mut().zip(&p.a) {
            dst.set_principal(&rows, src);
        }
        blocks.extend(p.part.blocks().iter().map(|b| b.iter().map(|i| i + offset).collect::<Vec<_>>()));
        offset += p.n();
    }
    Pencil::new(a0, a, BlockPartition::new(n, blocks)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::gen_blocklinear;
    use crate::symcore::{eigen_sym, extract_block};

    #[test]
    fn evaluate_examples() {
        let p = gen_blocklinear();
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap(), *p.a0());
        let ay = p.evaluate(&[0.0, 1.0]).unwrap();
        assert_eq!(ay[(1, 1)], 0.0);
        assert!(p.evaluate(&[1.0]).is_err());

        let disc = build_disc(1.5, [0.3, -0.7]).unwrap();
        let at_center = disc.evaluate(&[0.3, -0.7]).unwrap();
        assert_eq!(at_center, SymMatrix::from_diag(&[1.5, 1.5]));
        let boundary = disc.evaluate(&[1.8, -0.7]).unwrap();
        assert!(boundary[(0, 0)].abs() < 1e-15 && (boundary[(1, 1)] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn subsystem_examples() {
        let p = gen_blocklinear();
        assert_eq!(p.subsystem(&BlockIndexSet::full(3)).unwrap(), p);
        let s = p.subsystem(&BlockIndexSet::from_labels([1, 3])).unwrap();
        assert_eq!(s.n(), 3);
        // y1 <= 0, -y1 + y2 <= -1, y1 >= 2
        let ay = s.evaluate(&[1.0, 0.0]).unwrap();
        assert_eq!(ay.diag(), [-1.0, 0.0, -1.0]);
        let s2 = p.subsystem(&BlockIndexSet::from_labels([2])).unwrap();
        // y1 + y2 >= 1
        assert_eq!(s2.evaluate(&[0.5, 0.5]).unwrap()[(0, 0)], 0.0);
        assert!(p.subsystem(&BlockIndexSet::new([3])).is_err());
        assert!(p.subsystem(&BlockIndexSet::empty()).unwrap().is_empty());
    }

    #[test]
    fn halfplane_signs() {
        let h = build_halfplane(1.0, 0.0, 0.0);
        assert_eq!(h.evaluate(&[-1.0, 0.0]).unwrap()[(0, 0)], -1.0);
        let always = build_halfplane(0.0, 0.0, 1.0);
        assert_eq!(always.evaluate(&[7.0, -3.0]).unwrap()[(0, 0)], 1.0);
        let p2 = build_halfplane(1.0, 1.0, -1.0);
        let blocklinear = gen_blocklinear().subsystem(&BlockIndexSet::from_labels([2])).unwrap();
        for y in [[0.2, 0.3], [2.0, -1.0], [-4.0, 1.5]] {
            assert_eq!(p2.evaluate(&y).unwrap()[(0, 0)], blocklinear.evaluate(&y).unwrap()[(0, 0)]);
        }
    }

    #[test]
    fn disc_rejects_nonpositive_radius() {
        assert!(build_disc(0.0, [0.0, 0.0]).is_err());
        assert!(build_disc(-1.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn disc_determinant_matches_distance() {
        // det K = r² − ‖y − c‖², expanded by hand
        let cases = [(1.0, [0.0, 0.0], [0.3, 0.4]), (2.5, [1.0, -2.0], [3.0, 0.5]), (0.7, [-0.2, 0.9], [-0.2, 0.9])];
        for (r, c, y) in cases {
            let k = build_disc(r, c).unwrap().evaluate(&y).unwrap();
            let det = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(0, 1)];
            let d2 = (y[0] - c[0]) * (y[0] - c[0]) + (y[1] - c[1]) * (y[1] - c[1]);
            assert!((det - (r * r - d2)).abs() < 1e-12);
        }
    }

    #[test]
    fn concat_reproduces_blocklinear() {
        let p = gen_blocklinear();
        let parts: Vec<Pencil> = (0..3).map(|b| p.subsystem(&BlockIndexSet::new([b])).unwrap()).collect();
        assert_eq!(concat_blocks(&parts).unwrap(), p);
        assert_eq!(concat_blocks(&parts[..1]).unwrap(), parts[0]);
        assert!(concat_blocks(&[parts[0].clone(), Pencil::empty(3)]).is_err());
    }

    #[test]
    fn construction_rejects_off_block_entries() {
        let mut a0 = SymMatrix::from_diag(&[1.0, 1.0]);
        a0[(0, 1)] = 0.5;
        let err = Pencil::new(a0, vec![], BlockPartition::singletons(2)).unwrap_err();
        assert_eq!(err, Error::NotBlockDiagonal { matrix: 0, row: 0, col: 1 });
    }

    #[test]
    fn restriction_commutes_with_evaluation() {
        let p = crate::recovery::gen_blocksdp(1.0);
        let set = BlockIndexSet::from_labels([1, 3]);
        let y = [0.7, -1.3];
        let lhs = p.subsystem(&set).unwrap().evaluate(&y).unwrap();
        let rows = p.partition().union(&set);
        assert_eq!(lhs, p.evaluate(&y).unwrap().principal(&rows));
        let b3 = extract_block(&p.evaluate(&y).unwrap(), p.partition(), 2).unwrap();
        assert!(eigen_sym(&b3).is_ok());
    }
}
