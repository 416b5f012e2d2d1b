//! Equitable partitions, ε-regularity certificates for pairs of parts,
//! energy-increment refinement, and the quotient graph with matching
//! statistics.

mod certify;
mod quotient;
mod refine;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

pub use certify::{certify_pair, min_witness_size, EXHAUSTIVE_LIMIT};
pub use quotient::{build_quotient, classify_density, EdgeClass, QuotientGraph, QuotientPair};
pub use refine::{certify_all_pairs, refine_partition, Refinement};

/// Slack when comparing a deviation against ε, so that a witness whose
/// deviation equals ε up to rounding still counts.
pub const DEVIATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquitablePartition {
    parts: Vec<VertexSet>,
    pub eps: f64,
}

impl EquitablePartition {
    /// Checks that `parts` cover `0..g.n()` disjointly with sizes differing
    /// by at most one.
    pub fn new(g: &Graph, parts: Vec<VertexSet>, eps: f64) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("a partition needs at least one part"));
        }
        let mut seen = vec![false; g.n()];
        for part in &parts {
            for v in part.iter() {
                if v >= g.n() || std::mem::replace(&mut seen[v], true) {
                    return Err(Error::invalid(format!(
                        "vertex {v} is out of range or repeated"
                    )));
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("vertex {v} is in no part")));
        }
        let min = parts.iter().map(VertexSet::len).min().unwrap_or(0);
        let max = parts.iter().map(VertexSet::len).max().unwrap_or(0);
        if max - min > 1 {
            return Err(Error::invalid(format!(
                "part sizes range from {min} to {max}; not equitable"
            )));
        }
        Ok(EquitablePartition { parts, eps })
    }

    /// `k` consecutive blocks of `0..n`, the first `n % k` one larger.
    pub fn contiguous(n: usize, k: usize, eps: f64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "cannot split {n} vertices into {k} parts"
            )));
        }
        let order: Vec<usize> = (0..n).collect();
        Ok(Self::chop(&order, k, eps))
    }

    /// Cuts `order` into `k` consecutive equitable blocks.
    pub(crate) fn chop(order: &[usize], k: usize, eps: f64) -> Self {
        let n = order.len();
        let (base, extra) = (n / k, n % k);
        let mut parts = Vec::with_capacity(k);
        let mut start = 0;
        for i in 0..k {
            let len = base + usize::from(i < extra);
            let mut block = order[start..start + len].to_vec();
            block.sort_unstable();
            parts.push(VertexSet::from_sorted(block));
            start += len;
        }
        EquitablePartition { parts, eps }
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &VertexSet {
        &self.parts[i]
    }

    pub fn n(&self) -> usize {
        self.parts.iter().map(VertexSet::len).sum()
    }

    /// Part index of every vertex.
    pub fn part_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (i, part) in self.parts.iter().enumerate() {
            for v in part.iter() {
                out[v] = i;
            }
        }
        out
    }

    pub fn is_equitable(&self) -> bool {
        let min = self.parts.iter().map(VertexSet::len).min().unwrap_or(0);
        let max = self.parts.iter().map(VertexSet::len).max().unwrap_or(0);
        max - min <= 1
    }
}

/// Mean-square density `Σ_{i<j} |V_i||V_j| d(V_i,V_j)² / n²`.
pub fn mean_square_index(g: &Graph, partition: &EquitablePartition) -> f64 {
    let k = partition.k();
    let part_of = partition.part_of();
    let mut between = vec![0usize; k * k];
    for (u, v) in g.edges() {
        let (a, b) = (part_of[u], part_of[v]);
        if a != b {
            between[a.min(b) * k + a.max(b)] += 1;
        }
    }
    let n2 = (g.n() * g.n()) as f64;
    let mut q = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let size = (partition.part(i).len() * partition.part(j).len()) as f64;
            let e = between[i * k + j] as f64;
            // |Vi||Vj| d² = e² / (|Vi||Vj|)
            q += e * e / size / n2;
        }
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Regular,
    Irregular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertifyMode {
    /// Every admissible `X'` was enumerated; the verdict is exact.
    Exhaustive,
    /// Witness search plus a second-moment bound.
    Heuristic,
    /// Supplied by the caller (planted fixtures), not computed.
    Declared,
}

/// Subsets `X' ⊆ V_i`, `Y' ⊆ V_j` whose density strays from the pair's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub density: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub mode: CertifyMode,
    /// Smallest parameter at which a regular verdict is proven. Equals `eps`
    /// for exhaustive and irregular verdicts.
    pub effective_eps: f64,
    /// False only for heuristic regular verdicts whose bound does not reach
    /// `eps`.
    pub certified: bool,
}

impl PairReport {
    /// A verdict supplied from outside, used for planted constructions.
    pub fn declared(i: usize, j: usize, density: f64, verdict: Verdict, eps: f64) -> Self {
        PairReport {
            i,
            j,
            density,
            verdict,
            witness: None,
            mode: CertifyMode::Declared,
            effective_eps: eps,
            certified: true,
        }
    }

    pub fn is_irregular(&self) -> bool {
        self.verdict == Verdict::Irregular
    }
}
