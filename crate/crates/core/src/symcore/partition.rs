use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;


use super::matrix::SymMatrix;
use crate::error::{Error, Result};

/// Ordered partition of `{0, …, n−1}` into non-empty blocks.
///
/// Indices inside a block are ascending. Blocks need not be contiguous;
/// [`BlockPartition::canonical_permutation`] yields the relabelling that makes
/// them so.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl BlockPartition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() && n > 0 {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        let mut owner = vec![usize::MAX; n];
        let mut blocks = blocks;
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("index {i} out of range for n = {n}")));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("index {i} appears twice")));
                }
                owner[i] = b;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidPartition(format!("index {i} is not covered")));
        }
        Ok(BlockPartition { n, blocks, owner })
    }

    /// Contiguous blocks of the given sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            blocks.push((start..start + s).collect());
            start += s;
        }
        Self::new(start, blocks)
    }

    /// `n` singleton blocks.
    pub fn singletons(n: usize) -> Self {
        Self::from_sizes(&vec![1; n]).expect("singleton partition is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of blocks `k`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, i: usize) -> &[usize] {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Block that owns row index `i`.
    pub fn owner(&self, i: usize) -> usize {
        self.owner[i]
    }

    pub fn is_contiguous(&self) -> bool {
        let mut next = 0;
        for b in &self.blocks {
            for &i in b {
                if i != next {
                    return false;
                }
                next += 1;
            }
        }
        true
    }

    /// Permutation `perm` with `perm[new] = old` that lays the blocks out
    /// contiguously in block order.
    pub fn canonical_permutation(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// Union `B(I)` of the selected blocks, ascending.
    pub fn union(&self, set: &BlockIndexSet) -> Vec<usize> {
        let mut idx: Vec<usize> = set.iter().flat_map(|b| self.blocks[b].iter().copied()).collect();
        idx.sort_unstable();
        idx
    }

    /// Partition induced on `B(I)`, with indices renumbered to `0..|B(I)|`.
    pub fn restrict(&self, set: &BlockIndexSet) -> BlockPartition {
        let rows = self.union(set);
        let mut new_index = vec![usize::MAX; self.n];
        for (k, &i) in rows.iter().enumerate() {
            new_index[i] = k;
        }
        let blocks = set.iter().map(|b| self.blocks[b].iter().map(|&i| new_index[i]).collect()).collect();
        BlockPartition::new(rows.len(), blocks).expect("restriction of a partition is a partition")
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::BlockIndexOutOfRange { index: i, blocks: self.len() });
        }
        Ok(())
    }
}

/// Sorted set of 0-based block indices. Displayed with 1-based labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BlockIndexSet(Vec<usize>);

impl BlockIndexSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        BlockIndexSet(v)
    }

    pub fn empty() -> Self {
        BlockIndexSet(Vec::new())
    }

    pub fn full(k: usize) -> Self {
        BlockIndexSet((0..k).collect())
    }

    /// From 1-based labels.
    pub fn from_labels(labels: impl IntoIterator<Item = usize>) -> Self {
        Self::new(labels.into_iter().map(|l| l - 1))
    }

    pub fn labels(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn without(&self, i: usize) -> Self {
        BlockIndexSet(self.0.iter().copied().filter(|&j| j != i).collect())
    }

    pub fn is_subset(&self, other: &BlockIndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn validate(&self, part: &BlockPartition) -> Result<()> {
        match self.0.last() {
            Some(&i) => part.check_index(i),
            None => Ok(()),
        }
    }

    /// Subset selected by the bits of `mask` over the members of `self`.
    pub fn subset_by_mask(&self, mask: u64) -> Self {
        BlockIndexSet(self.0.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &i)| i).collect())
    }
}

impl fmt::Display for BlockIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, l) in self.labels().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for BlockIndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::new(iter)
    }
}

/// Principal submatrix of `a` on block `i`.
pub fn extract_block(a: &SymMatrix, part: &BlockPartition, i: usize) -> Result<SymMatrix> {
    check_dim(a, part)?;
    part.check_index(i)?;
    Ok(a.principal(part.block(i)))
}

/// `BS(X) = {i : ‖X_{B_i}‖_max > tol}`.
pub fn block_support(x: &SymMatrix, part: &BlockPartition, tol: f64) -> Result<BlockIndexSet> {
    check_dim(x, part)?;
    Ok((0..part.len())
        .filter(|&b| {
            let idx = part.block(b);
            idx.iter().enumerate().any(|(k, &i)| idx[k..].iter().any(|&j| x[(i, j)].abs() > tol))
        })
        .collect())
}

/// True iff every entry outside the diagonal blocks has magnitude `≤ tol`.
pub fn is_block_diagonal(a: &SymMatrix, part: &BlockPartition, tol: f64) -> Result<bool> {
    Ok(first_off_block_entry(a, part, tol)?.is_none())
}

pub(crate) fn first_off_block_entry(a: &SymMatrix, part: &BlockPartition, tol: f64) -> Result<Option<(usize, usize)>> {
    check_dim(a, part)?;
    for (i, j, v) in a.upper_entries() {
        if part.owner(i) != part.owner(j) && v.abs() > tol {
            return Ok(Some((i, j)));
        }
    }
    Ok(None)
}

fn check_dim(a: &SymMatrix, part: &BlockPartition) -> Result<()> {
    if a.dim() != part.n() {
        return Err(Error::DimensionMismatch { expected: part.n(), found: a.dim() });
    }
    Ok(())
}
