//! Energy-increment refinement.
//!
//! Each round certifies every pair, splits each part into atoms (vertices
//! grouped by which witness sets of that part they lie in), lists all
//! vertices part by part in atom order, and cuts that list into more
//! equitable blocks. Several block counts are tried and the one with the
//! largest index wins. A round is only accepted if the index does not drop.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{certify_pair, mean_square_index, EquitablePartition, PairReport};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Refinement {
    pub partition: EquitablePartition,
    pub reports: Vec<PairReport>,
    /// Index of the partition after each accepted round, starting with the
    /// initial one.
    pub index_trace: Vec<f64>,
    /// Number of parts after each accepted round.
    pub part_counts: Vec<usize>,
    /// The part cap was reached with too many irregular pairs left.
    pub cap_hit: bool,
    /// No candidate refinement kept the index from dropping.
    pub stalled: bool,
}

impl Refinement {
    pub fn irregular_count(&self) -> usize {
        self.reports.iter().filter(|r| r.is_irregular()).count()
    }

    /// At most `eps K²` irregular pairs.
    pub fn is_regular_partition(&self) -> bool {
        let k = self.partition.k() as f64;
        self.irregular_count() as f64 <= self.partition.eps * k * k
    }
}

/// Reports for every pair `i < j`, in lexicographic order.
pub fn certify_all_pairs(
    g: &Graph,
    partition: &EquitablePartition,
    eps: f64,
) -> Result<Vec<PairReport>> {
    let k = partition.k();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| {
            let mut r = certify_pair(g, partition.part(i), partition.part(j), eps)?;
            r.i = i;
            r.j = j;
            Ok(r)
        })
        .collect()
}

pub fn refine_partition(g: &Graph, eps: f64, k0: usize, max_k: usize) -> Result<Refinement> {
    let n = g.n();
    if k0 == 0 || n < k0 {
        return Err(Error::invalid(format!(
            "cannot start from {k0} parts on {n} vertices"
        )));
    }
    if max_k < k0 {
        return Err(Error::invalid(format!(
            "max_K = {max_k} is below k0 = {k0}"
        )));
    }
    let limit = max_k.min(n);
    let mut partition = EquitablePartition::contiguous(n, k0, eps)?;
    let mut reports = certify_all_pairs(g, &partition, eps)?;
    let mut index = mean_square_index(g, &partition);
    let mut out = Refinement {
        partition: partition.clone(),
        reports: Vec::new(),
        index_trace: vec![index],
        part_counts: vec![k0],
        cap_hit: false,
        stalled: false,
    };
    loop {
        let k = partition.k();
        let irregular = reports.iter().filter(|r| r.is_irregular()).count();
        if irregular as f64 <= eps * (k * k) as f64 {
            break;
        }
        if k >= limit {
            out.cap_hit = true;
            break;
        }
        let (order, atoms) = atom_order(&partition, &reports);
        let mut best: Option<(f64, EquitablePartition)> = None;
        for count in candidate_counts(k, atoms, limit) {
            let next = EquitablePartition::chop(&order, count, eps);
            let q = mean_square_index(g, &next);
            if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
                best = Some((q, next));
            }
        }
        match best {
            Some((q, next)) if q >= index => {
                partition = next;
                index = q;
                reports = certify_all_pairs(g, &partition, eps)?;
                out.index_trace.push(index);
                out.part_counts.push(partition.k());
            }
            _ => {
                out.stalled = true;
                break;
            }
        }
    }
    out.partition = partition;
    out.reports = reports;
    Ok(out)
}

/// All vertices, part by part, each part sorted by witness membership.
/// Returns the order and the total number of atoms.
fn atom_order(partition: &EquitablePartition, reports: &[PairReport]) -> (Vec<usize>, usize) {
    let k = partition.k();
    let mut sets: Vec<Vec<&[usize]>> = vec![Vec::new(); k];
    for r in reports {
        if let Some(w) = &r.witness {
            sets[r.i].push(&w.x);
            sets[r.j].push(&w.y);
        }
    }
    let mut order = Vec::with_capacity(partition.n());
    let mut atoms = 0;
    for (i, part) in partition.parts().iter().enumerate() {
        let mut keyed: Vec<(Vec<bool>, usize)> = part
            .iter()
            .map(|v| {
                let sig = sets[i]
                    .iter()
                    .map(|s| s.binary_search(&v).is_ok())
                    .collect();
                (sig, v)
            })
            .collect();
        keyed.sort();
        atoms += 1 + keyed.windows(2).filter(|w| w[0].0 != w[1].0).count();
        order.extend(keyed.into_iter().map(|(_, v)| v));
    }
    (order, atoms)
}

/// The atom count and successive doublings of `k`, clamped to `limit`,
/// keeping only counts above `k`.
fn candidate_counts(k: usize, atoms: usize, limit: usize) -> Vec<usize> {
    let mut out = vec![atoms.min(limit)];
    let mut c = 2 * k;
    loop {
        out.push(c.min(limit));
        if c >= limit {
            break;
        }
        c *= 2;
    }
    out.retain(|&c| c > k);
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_needs_no_round() {
        let g = Graph::complete(40);
        let r = refine_partition(&g, 0.2, 4, 16).unwrap();
        assert_eq!(r.partition.k(), 4);
        assert_eq!(r.irregular_count(), 0);
        assert_eq!(r.index_trace.len(), 1);
        assert!(!r.cap_hit && !r.stalled);
    }

    #[test]
    fn argument_checks() {
        let g = Graph::complete(5);
        assert!(refine_partition(&g, 0.2, 6, 8).is_err());
        assert!(refine_partition(&g, 0.2, 0, 8).is_err());
        assert!(refine_partition(&g, 0.2, 3, 2).is_err());
    }

    #[test]
    fn candidates() {
        assert_eq!(candidate_counts(4, 11, 64), vec![8, 11, 16, 32, 64]);
        assert_eq!(candidate_counts(4, 3, 6), vec![6]);
        assert_eq!(candidate_counts(6, 6, 6), Vec::<usize>::new());
    }
}
