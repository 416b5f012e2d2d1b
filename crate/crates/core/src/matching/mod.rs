//! Matchings: maximum matching in general and bipartite graphs, and the
//! exact census of maximal matchings used as a ground-truth oracle.

mod bipartite;
mod blossom;
mod census;

pub use bipartite::hopcroft_karp;
pub use blossom::max_matching;
pub use census::{
    census_limit_from_env, census_maximal_matchings, census_with_limit, coverage_threshold,
    for_each_maximal_matching, nm_count, CensusResult, CENSUS_LIMIT_ENV, DEFAULT_CENSUS_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A set of vertex-disjoint edges, each stored as `(u, v)` with `u < v`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        let mut ends: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        ends.sort_unstable();
        if edges.iter().any(|&(u, v)| u == v) || ends.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("matching edges share an endpoint"));
        }
        Ok(Matching { edges })
    }

    /// From a mate array where `mate[v] == Some(u)` iff `mate[u] == Some(v)`.
    pub fn from_mates(mate: &[Option<usize>]) -> Self {
        let edges = mate
            .iter()
            .enumerate()
            .filter_map(|(v, m)| m.filter(|&u| v < u).map(|u| (v, u)))
            .collect();
        Matching { edges }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// Number of covered vertices, `2 |M|`.
    pub fn coverage(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn mates(&self, n: usize) -> Vec<Option<usize>> {
        let mut mate = vec![None; n];
        for &(u, v) in &self.edges {
            mate[u] = Some(v);
            mate[v] = Some(u);
        }
        mate
    }

    pub fn is_valid_in(&self, g: &Graph) -> bool {
        self.edges
            .iter()
            .all(|&(u, v)| v < g.n() && g.has_edge(u, v))
    }
}

/// True iff no edge of `g` has both endpoints uncovered by `m`.
pub fn is_maximal(g: &Graph, m: &Matching) -> Result<bool> {
    if !m.is_valid_in(g) {
        return Err(Error::invalid(
            "matching uses an edge that is not in the graph",
        ));
    }
    let covered = m.mates(g.n());
    Ok(g.edges()
        .all(|(u, v)| covered[u].is_some() || covered[v].is_some()))
}

/// Extends `m` greedily (lowest vertex first) to a maximal matching.
pub fn extend_to_maximal(g: &Graph, m: &Matching) -> Matching {
    let mut mate = m.mates(g.n());
    for u in 0..g.n() {
        if mate[u].is_some() {
            continue;
        }
        if let Some(&v) = g.neighbors(u).iter().find(|&&v| mate[v as usize].is_none()) {
            mate[u] = Some(v as usize);
            mate[v as usize] = Some(u);
        }
    }
    Matching::from_mates(&mate)
}
