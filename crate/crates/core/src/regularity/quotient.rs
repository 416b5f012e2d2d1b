use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EquitablePartition, PairReport};
use crate::error::{Error, Result};
use crate::graph::{induced, induced_bipartite, Graph};
use crate::matching::{hopcroft_karp, max_matching};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    /// Irregular pair.
    E1,
    /// Regular, density below `n^{√ε−1}`.
    E2,
    /// Regular, density in `[n^{√ε−1}, n^{−√ε})`.
    E3,
    /// Regular, density at least `n^{−√ε}`.
    E4,
}

/// Class of a regular pair of the given density. A boundary value goes to
/// the denser class.
pub fn classify_density(density: f64, n: usize, eps: f64) -> EdgeClass {
    let (low, high) = thresholds(n, eps);
    if density >= high {
        EdgeClass::E4
    } else if density >= low {
        EdgeClass::E3
    } else {
        EdgeClass::E2
    }
}

fn thresholds(n: usize, eps: f64) -> (f64, f64) {
    let (n, r) = (n as f64, eps.sqrt());
    (n.powf(r - 1.0), n.powf(-r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientPair {
    pub i: usize,
    pub j: usize,
    pub class: EdgeClass,
    pub density: f64,
    /// `K m_ij / n` for E1 pairs, where `m_ij` is the matching number of
    /// `G[V_i, V_j]`.
    pub r: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientGraph {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub eps: f64,
    /// Pair densities off the diagonal, densities of `G[V_i]` on it.
    pub p: Vec<Vec<f64>>,
    /// Every pair `i < j` in lexicographic order.
    pub pairs: Vec<QuotientPair>,
    /// `2K m_i / n`, where `m_i` is the matching number of `G[V_i]`.
    pub r_vertex: Vec<f64>,
    pub low_threshold: f64,
    pub high_threshold: f64,
}

impl QuotientGraph {
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        // pairs before row i, then offset within the row
        i * self.k - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn pair(&self, i: usize, j: usize) -> &QuotientPair {
        assert!(i != j, "the quotient has no loops");
        &self.pairs[self.slot(i, j)]
    }

    pub fn class(&self, i: usize, j: usize) -> EdgeClass {
        self.pair(i, j).class
    }

    pub fn pairs_in(&self, class: EdgeClass) -> impl Iterator<Item = &QuotientPair> {
        self.pairs.iter().filter(move |p| p.class == class)
    }

    pub fn count(&self, class: EdgeClass) -> usize {
        self.pairs_in(class).count()
    }
}

/// Classifies every pair and gathers the matching statistics.
pub fn build_quotient(
    g: &Graph,
    partition: &EquitablePartition,
    reports: &[PairReport],
    eps: f64,
) -> Result<QuotientGraph> {
    let (n, k) = (g.n(), partition.k());
    if partition.n() != n {
        return Err(Error::invalid("partition does not match the graph"));
    }
    let mut by_pair: Vec<Option<&PairReport>> = vec![None; k * k];
    for r in reports {
        let (i, j) = (r.i.min(r.j), r.i.max(r.j));
        if i == j || j >= k {
            return Err(Error::invalid(format!(
                "report for invalid pair ({}, {})",
                r.i, r.j
            )));
        }
        by_pair[i * k + j] = Some(r);
    }
    let pair_list: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let mut reports_in_order = Vec::with_capacity(pair_list.len());
    for &(i, j) in &pair_list {
        match by_pair[i * k + j] {
            Some(r) => reports_in_order.push(r),
            None => return Err(Error::invalid(format!("no report for pair ({i}, {j})"))),
        }
    }
    let scale = k as f64 / n as f64;
    let pairs = pair_list
        .par_iter()
        .zip(reports_in_order.par_iter())
        .map(|(&(i, j), r)| {
            let (class, r_ij) = if r.is_irregular() {
                let sub = induced_bipartite(g, partition.part(i), partition.part(j))?;
                let left: Vec<bool> = (0..sub.graph.n())
                    .map(|v| v < partition.part(i).len())
                    .collect();
                let m = hopcroft_karp(&sub.graph, &left).size();
                (EdgeClass::E1, Some(scale * m as f64))
            } else {
                (classify_density(r.density, n, eps), None)
            };
            Ok(QuotientPair {
                i,
                j,
                class,
                density: r.density,
                r: r_ij,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let inner: Vec<(f64, f64)> = partition
        .parts()
        .par_iter()
        .map(|part| {
            let sub = induced(g, part);
            let s = part.len();
            let density = if s < 2 {
                0.0
            } else {
                2.0 * sub.graph.edge_count() as f64 / (s * (s - 1)) as f64
            };
            (
                density,
                2.0 * scale * max_matching(&sub.graph).size() as f64,
            )
        })
        .collect();

    let mut p = vec![vec![0.0; k]; k];
    for (i, &(d, _)) in inner.iter().enumerate() {
        p[i][i] = d;
    }
    for q in &pairs {
        p[q.i][q.j] = q.density;
        p[q.j][q.i] = q.density;
    }
    let (low_threshold, high_threshold) = thresholds(n, eps);
    Ok(QuotientGraph {
        n,
        k,
        eps,
        p,
        pairs,
        r_vertex: inner.into_iter().map(|(_, r)| r).collect(),
        low_threshold,
        high_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularity::{certify_all_pairs, Verdict};

    #[test]
    fn boundaries_go_to_denser_class() {
        let (n, eps) = (10_000, 0.04);
        let (low, high) = thresholds(n, eps);
        assert_eq!(classify_density(high, n, eps), EdgeClass::E4);
        assert_eq!(classify_density(low, n, eps), EdgeClass::E3);
        assert_eq!(classify_density(low * 0.999, n, eps), EdgeClass::E2);
        assert_eq!(classify_density(0.0, n, eps), EdgeClass::E2);
        assert_eq!(classify_density(0.5, n, eps), EdgeClass::E4);
    }

    #[test]
    fn empty_graph_is_all_sparse() {
        let g = Graph::empty(12);
        let part = EquitablePartition::contiguous(12, 3, 0.25).unwrap();
        let reports = certify_all_pairs(&g, &part, 0.25).unwrap();
        let q = build_quotient(&g, &part, &reports, 0.25).unwrap();
        assert!(q
            .pairs
            .iter()
            .all(|p| p.class == EdgeClass::E2 && p.r.is_none()));
        assert!(q.r_vertex.iter().all(|&r| r == 0.0));
        assert_eq!(q.pair(2, 0).i, 0);
        assert_eq!(q.pair(1, 2).j, 2);
    }

    #[test]
    fn irregular_pairs_get_matching_ratio() {
        // K_{4,4} between parts 0 and 1, declared irregular; a path inside part 2
        let mut edges: Vec<(usize, usize)> =
            (0..4).flat_map(|u| (4..8).map(move |v| (u, v))).collect();
        edges.extend([(8, 9), (9, 10), (10, 11)]);
        let g = Graph::from_edges(12, edges).unwrap();
        let part = EquitablePartition::contiguous(12, 3, 0.1).unwrap();
        let reports = vec![
            PairReport::declared(0, 1, 1.0, Verdict::Irregular, 0.1),
            PairReport::declared(0, 2, 0.0, Verdict::Regular, 0.1),
            PairReport::declared(1, 2, 0.0, Verdict::Regular, 0.1),
        ];
        let q = build_quotient(&g, &part, &reports, 0.1).unwrap();
        assert_eq!(q.class(0, 1), EdgeClass::E1);
        // K m / n = 3 * 4 / 12
        assert_eq!(q.pair(0, 1).r, Some(1.0));
        // 2 K m / n = 2 * 3 * 2 / 12
        assert_eq!(q.r_vertex, vec![0.0, 0.0, 1.0]);
        assert!((q.p[2][2] - 0.5).abs() < 1e-15);
        assert!(build_quotient(&g, &part, &reports[..2], 0.1).is_err());
    }
}
