//! Exact counts of maximal matchings, bucketed by how many vertices they
//! cover.
//!
//! Both the enumerator and the counter branch on the lowest undecided
//! vertex `v`: either `v` is matched to an undecided neighbour, or `v` is
//! left uncovered, in which case every undecided neighbour of `v` joins the
//! "must be covered" set. A branch dies as soon as a must-cover vertex has
//! no undecided neighbour left. The counter memoises on the pair
//! (undecided set, must-cover set), which determines the sub-count.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_CENSUS_LIMIT: usize = 24;

/// Environment variable overriding [`DEFAULT_CENSUS_LIMIT`].
pub const CENSUS_LIMIT_ENV: &str = "NEARPM_CENSUS_MAX_N";

/// Hard ceiling imposed by the 64-bit vertex masks.
const MASK_BITS: usize = 64;

/// Limit from [`CENSUS_LIMIT_ENV`], falling back to the default when unset
/// or unparsable.
pub fn census_limit_from_env() -> usize {
    std::env::var(CENSUS_LIMIT_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_CENSUS_LIMIT)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusResult {
    pub n: usize,
    /// Covered-vertex count `2k` → number of maximal matchings of size `k`.
    /// Absent keys mean zero.
    pub by_coverage: BTreeMap<usize, u64>,
}

impl CensusResult {
    pub fn count(&self, coverage: usize) -> u64 {
        self.by_coverage.get(&coverage).copied().unwrap_or(0)
    }

    /// Total number of maximal matchings.
    pub fn total(&self) -> u64 {
        self.by_coverage.values().sum()
    }

    /// `NM(G, eps)`: maximal matchings covering at least `(1 - eps) n`
    /// vertices.
    pub fn nm_of_eps(&self, eps: f64) -> u64 {
        let t = coverage_threshold(self.n, eps);
        self.by_coverage.range(t..).map(|(_, c)| c).sum()
    }
}

/// `ceil((1 - eps) n)`, with a little slack so that e.g. `0.9 * 10` is 9.
pub fn coverage_threshold(n: usize, eps: f64) -> usize {
    let raw = (1.0 - eps) * n as f64;
    (raw - 1e-9).ceil().max(0.0) as usize
}

fn check_size(g: &Graph, limit: usize) -> Result<()> {
    let limit = limit.min(MASK_BITS);
    if g.n() > limit {
        return Err(Error::ResourceLimit {
            what: "census vertex count",
            actual: g.n(),
            limit,
        });
    }
    Ok(())
}

fn neighbor_masks(g: &Graph) -> Vec<u64> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u))
        .collect()
}

#[inline]
fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Some must-cover vertex has no undecided neighbour left.
#[inline]
fn stranded(nbr: &[u64], avail: u64, must: u64) -> bool {
    let mut m = must;
    while m != 0 {
        let x = m.trailing_zeros() as usize;
        m &= m - 1;
        if nbr[x] & avail & !(1 << x) == 0 {
            return true;
        }
    }
    false
}

/// Exact census with the default (or environment) size limit.
pub fn census_maximal_matchings(g: &Graph) -> Result<CensusResult> {
    census_with_limit(g, census_limit_from_env())
}

pub fn census_with_limit(g: &Graph, limit: usize) -> Result<CensusResult> {
    check_size(g, limit)?;
    let n = g.n();
    let mut counter = Counter {
        nbr: neighbor_masks(g),
        memo: HashMap::new(),
        width: n / 2 + 1,
    };
    let counts = counter.count(full_mask(n), 0);
    let by_coverage = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| (2 * k, c))
        .collect();
    Ok(CensusResult { n, by_coverage })
}

struct Counter {
    nbr: Vec<u64>,
    memo: HashMap<(u64, u64), Box<[u64]>>,
    width: usize,
}

impl Counter {
    /// Counts by matching size over all completions of the state.
    fn count(&mut self, avail: u64, must: u64) -> Box<[u64]> {
        if avail == 0 {
            let mut out = vec![0; self.width].into_boxed_slice();
            out[0] = 1;
            return out;
        }
        if let Some(hit) = self.memo.get(&(avail, must)) {
            return hit.clone();
        }
        let mut out = vec![0u64; self.width].into_boxed_slice();
        let v = avail.trailing_zeros() as usize;
        let rest = avail & !(1 << v);

        let mut partners = self.nbr[v] & rest;
        while partners != 0 {
            let u = partners.trailing_zeros() as usize;
            partners &= partners - 1;
            let a = rest & !(1 << u);
            let m = must & a;
            if stranded(&self.nbr, a, m) {
                continue;
            }
            let sub = self.count(a, m);
            for k in 0..self.width - 1 {
                out[k + 1] += sub[k];
            }
        }

        if must >> v & 1 == 0 {
            let m = (must | self.nbr[v]) & rest;
            if !stranded(&self.nbr, rest, m) {
                let sub = self.count(rest, m);
                for k in 0..self.width {
                    out[k] += sub[k];
                }
            }
        }

        self.memo.insert((avail, must), out.clone());
        out
    }
}

/// Calls `visit` once for every maximal matching of `g`, in a fixed order.
/// Edges are passed as `(u, v)` with `u < v`, sorted by `u`.
pub fn for_each_maximal_matching<F>(g: &Graph, limit: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[(usize, usize)]),
{
    check_size(g, limit)?;
    let nbr = neighbor_masks(g);
    let mut stack = Vec::new();
    enumerate(&nbr, full_mask(g.n()), 0, &mut stack, &mut visit);
    Ok(())
}

fn enumerate<F>(nbr: &[u64], avail: u64, must: u64, edges: &mut Vec<(usize, usize)>, visit: &mut F)
where
    F: FnMut(&[(usize, usize)]),
{
    if avail == 0 {
        visit(edges);
        return;
    }
    let v = avail.trailing_zeros() as usize;
    let rest = avail & !(1 << v);
    let mut partners = nbr[v] & rest;
    while partners != 0 {
        let u = partners.trailing_zeros() as usize;
        partners &= partners - 1;
        let a = rest & !(1 << u);
        let m = must & a;
        if stranded(nbr, a, m) {
            continue;
        }
        edges.push((v, u));
        enumerate(nbr, a, m, edges, visit);
        edges.pop();
    }
    if must >> v & 1 == 0 {
        let m = (must | nbr[v]) & rest;
        if !stranded(nbr, rest, m) {
            enumerate(nbr, rest, m, edges, visit);
        }
    }
}

/// `NM(G, eps)` computed from the exact census.
pub fn nm_count(g: &Graph, eps: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("eps = {eps} is not in [0, 1]")));
    }
    Ok(census_maximal_matchings(g)?.nm_of_eps(eps))
}
