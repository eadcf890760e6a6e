//! Problem files and matrix files.
//!
//! A problem file lists `n`, `m`, a block partition and the `m + 1` pencil
//! matrices (index 0 is `A₀`) as upper-triangle `[i, j, value]` triplets with
//! 0-based indices. A matrix file holds one symmetric matrix as `{n, entries}`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use lmi_iis_core::pencil::Pencil;
use lmi_iis_core::symcore::{BlockPartition, SymMatrix};
use lmi_iis_core::Error as CoreError;
use serde::{Deserialize, Serialize};

/// `(i, j, value)` with `i ≤ j`.
pub type Triplet = (usize, usize, f64);

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
}

fn invalid(at: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Invalid { at: at.into(), message: message.into() }
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        // serde_json appends the position itself; keep only the description
        let message = match message.rfind(" at line ") {
            Some(cut) => message[..cut].to_string(),
            None => message,
        };
        InputError::Syntax { line: e.line(), column: e.column(), message }
    })
}

pub fn read_file(path: &str) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError::Io { path: path.to_string(), message: e.to_string() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    pub blocks: Vec<Vec<usize>>,
    pub matrices: Vec<Vec<Triplet>>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        from_json(text)
    }

    /// Nonzero upper-triangle entries in canonical order.
    pub fn from_pencil(p: &Pencil) -> Self {
        ProblemFile {
            n: p.n(),
            m: p.m(),
            blocks: p.partition().blocks().to_vec(),
            matrices: p.matrices().map(|a| sorted_entries(a, false)).collect(),
        }
    }

    pub fn to_pencil(&self) -> Result<Pencil, InputError> {
        if self.matrices.len() != self.m + 1 {
            return Err(invalid("matrices", format!("expected m + 1 = {} matrices, found {}", self.m + 1, self.matrices.len())));
        }
        let part = BlockPartition::new(self.n, self.blocks.clone()).map_err(|e| invalid("blocks", e.to_string()))?;
        let mut mats = Vec::with_capacity(self.matrices.len());
        for (k, entries) in self.matrices.iter().enumerate() {
            mats.push(build_matrix(self.n, entries, &format!("matrices[{k}]"))?);
        }
        let a0 = mats.remove(0);
        Pencil::new(a0, mats, part).map_err(|e| match e {
            CoreError::NotBlockDiagonal { matrix, row, col } => {
                invalid(format!("matrices[{matrix}]"), format!("entry ({row}, {col}) lies outside the declared blocks"))
            }
            other => invalid("problem", other.to_string()),
        })
    }

    /// Canonical text form: one matrix per line, triplets sorted by `(i, j)`.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{{");
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"m\": {},", self.m);
        let _ = writeln!(out, "  \"blocks\": {},", serde_json::to_string(&self.blocks).expect("plain data"));
        let _ = writeln!(out, "  \"matrices\": [");
        for (k, entries) in self.matrices.iter().enumerate() {
            let sep = if k + 1 < self.matrices.len() { "," } else { "" };
            let _ = writeln!(out, "    {}{sep}", serde_json::to_string(entries).expect("finite entries"));
        }
        let _ = writeln!(out, "  ]");
        let _ = writeln!(out, "}}");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<Triplet>,
}

impl MatrixFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        from_json(text)
    }

    /// Every upper-triangle entry, zeros included.
    pub fn from_matrix(x: &SymMatrix) -> Self {
        MatrixFile { n: x.dim(), entries: sorted_entries(x, true) }
    }

    pub fn to_matrix(&self) -> Result<SymMatrix, InputError> {
        build_matrix(self.n, &self.entries, "entries")
    }
}

fn sorted_entries(a: &SymMatrix, keep_zeros: bool) -> Vec<Triplet> {
    let mut v: Vec<Triplet> = a.upper_entries().filter(|&(_, _, x)| keep_zeros || x != 0.0).collect();
    v.sort_by_key(|a| (a.0, a.1));
    v
}

fn build_matrix(n: usize, entries: &[Triplet], at: &str) -> Result<SymMatrix, InputError> {
    let mut a = SymMatrix::zeros(n);
    let mut seen = BTreeSet::new();
    for (t, &(i, j, v)) in entries.iter().enumerate() {
        let here = || format!("{at}[{t}]");
        if i > j {
            return Err(invalid(here(), format!("({i}, {j}) is below the diagonal")));
        }
        if j >= n {
            return Err(invalid(here(), format!("index {j} out of range for n = {n}")));
        }
        if !v.is_finite() {
            return Err(invalid(here(), "value is not finite"));
        }
        if !seen.insert((i, j)) {
            return Err(invalid(here(), format!("duplicate entry ({i}, {j})")));
        }
        a[(i, j)] = v;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lmi_iis_core::recovery::{gen_blocklinear, gen_blocksdp};

    #[test]
    fn fixtures_round_trip() {
        for p in [gen_blocklinear(), gen_blocksdp(0.3)] {
            let f = ProblemFile::from_pencil(&p);
            let back = ProblemFile::parse(&f.emit()).unwrap();
            assert_eq!(back, f);
            assert_eq!(back.to_pencil().unwrap(), p);
        }
    }

    #[test]
    fn rejects_malformed_triplets() {
        let base = |m: &str| format!("{{\"n\": 2, \"m\": 0, \"blocks\": [[0], [1]], \"matrices\": [{m}]}}");
        let err = |m: &str| ProblemFile::parse(&base(m)).unwrap().to_pencil().unwrap_err().to_string();
        assert!(err("[[1, 0, 1.0]]").contains("below the diagonal"));
        assert!(err("[[0, 2, 1.0]]").contains("out of range"));
        assert!(err("[[0, 0, 1.0], [0, 0, 2.0]]").contains("duplicate"));
        assert!(err("[[0, 1, 1.0]]").contains("outside the declared blocks"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match ProblemFile::parse("{\n  \"n\": 2,\n  \"m\": ") {
            Err(InputError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matrix_file_keeps_zeros() {
        let x = SymMatrix::from_diag(&[1.0, 0.0]);
        let f = MatrixFile::from_matrix(&x);
        assert_eq!(f.entries, vec![(0, 0, 1.0), (0, 1, 0.0), (1, 1, 0.0)]);
        assert_eq!(MatrixFile::parse(&serde_json::to_string(&f).unwrap()).unwrap().to_matrix().unwrap(), x);
    }
}
