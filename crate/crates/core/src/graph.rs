//! Simple undirected graphs, vertex subsets and edge densities.
//!
//! A [`Graph`] is immutable once built. Adjacency lists are kept sorted, and
//! graphs up to [`BITSET_LIMIT`] vertices also carry a dense bit matrix so
//! that `has_edge` is a single word lookup.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count for which the dense adjacency bit matrix is built.
pub const BITSET_LIMIT: usize = 16_384;

/// Absolute tolerance used whenever two densities are compared.
pub const DENSITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
struct BitMatrix {
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            words,
            data: vec![0; words * n],
        }
    }

    #[inline]
    fn set(&mut self, u: usize, v: usize) {
        self.data[u * self.words + v / 64] |= 1 << (v % 64);
    }

    #[inline]
    fn get(&self, u: usize, v: usize) -> bool {
        self.data[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }
}

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    edge_count: usize,
    bits: Option<BitMatrix>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.adj == other.adj
    }
}

impl Eq for Graph {}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Self::from_sorted_adjacency(vec![Vec::new(); n])
    }

    /// Builds a graph from an edge list. Duplicate edges are merged; loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize {
            return Err(Error::invalid("vertex count does not fit in u32"));
        }
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_sorted_adjacency(adj))
    }

    /// Trusted constructor: lists must be sorted, symmetric and loop-free.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<u32>>) -> Self {
        let n = adj.len();
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        let bits = (n <= BITSET_LIMIT).then(|| {
            let mut b = BitMatrix::new(n);
            for (u, list) in adj.iter().enumerate() {
                for &v in list {
                    b.set(u, v as usize);
                }
            }
            b
        });
        debug_assert!(adj
            .iter()
            .enumerate()
            .all(|(u, l)| l.windows(2).all(|w| w[0] < w[1]) && !l.contains(&(u as u32))));
        Graph {
            adj,
            edge_count,
            bits,
        }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|u| (0..n as u32).filter(|&v| v as usize != u).collect())
            .collect();
        Self::from_sorted_adjacency(adj)
    }

    /// `K_{a,b}` with the `a` side on `0..a`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let n = a + b;
        let adj = (0..n)
            .map(|u| {
                if u < a {
                    (a as u32..n as u32).collect()
                } else {
                    (0..a as u32).collect()
                }
            })
            .collect();
        Self::from_sorted_adjacency(adj)
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three vertices");
        Self::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle edges are valid")
    }

    /// `K_{1,n-1}` with the centre at vertex 0.
    pub fn star(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|v| (0, v))).expect("star edges are valid")
    }

    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Self::from_edges(10, outer.chain(spokes).chain(inner)).expect("petersen edges are valid")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        match &self.bits {
            Some(b) => b.get(u, v),
            None => self.adj[u].binary_search(&(v as u32)).is_ok(),
        }
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }
}

/// A set of distinct vertices of some graph, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(g: &Graph, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        if let Some(&last) = v.last() {
            if last >= g.n() {
                return Err(Error::invalid(format!(
                    "vertex {last} is outside 0..{}",
                    g.n()
                )));
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("vertex set has repeated members"));
        }
        Ok(VertexSet(v))
    }

    /// Builds a set from members already known to be distinct and in range.
    pub(crate) fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn range(r: std::ops::Range<usize>) -> Self {
        VertexSet(r.collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

/// Number of edges with one endpoint in `x` and the other in `y`.
///
/// For overlapping sets an edge inside the overlap is counted once per
/// ordered pair, which callers never rely on.
pub fn cross_edges(g: &Graph, x: &[usize], y: &[usize]) -> usize {
    let scan_cost: usize = x.iter().map(|&u| g.degree(u)).sum::<usize>() + g.n();
    if g.bits.is_some() && x.len() * y.len() <= scan_cost {
        let mut count = 0;
        for &u in x {
            for &v in y {
                count += g.has_edge(u, v) as usize;
            }
        }
        return count;
    }
    let mut in_y = vec![false; g.n()];
    for &v in y {
        in_y[v] = true;
    }
    x.iter()
        .map(|&u| g.neighbors(u).iter().filter(|&&v| in_y[v as usize]).count())
        .sum()
}

/// `d(X, Y) = e(X, Y) / (|X| |Y|)` for non-empty disjoint `x`, `y`.
pub fn edge_density(g: &Graph, x: &VertexSet, y: &VertexSet) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::invalid("edge density needs two non-empty sets"));
    }
    if !x.is_disjoint(y) {
        return Err(Error::invalid("edge density needs disjoint sets"));
    }
    Ok(cross_edges(g, x.as_slice(), y.as_slice()) as f64 / (x.len() * y.len()) as f64)
}

/// A subgraph with vertices relabelled to `0..k`; `original[i]` is the
/// vertex of the parent graph that became `i`.
#[derive(Clone, Debug)]
pub struct Induced {
    pub graph: Graph,
    pub original: Vec<usize>,
}

/// `G[X]`.
pub fn induced(g: &Graph, x: &VertexSet) -> Induced {
    let mut index = vec![u32::MAX; g.n()];
    for (i, v) in x.iter().enumerate() {
        index[v] = i as u32;
    }
    let adj = x
        .iter()
        .map(|v| {
            let mut list: Vec<u32> = g
                .neighbors(v)
                .iter()
                .map(|&u| index[u as usize])
                .filter(|&i| i != u32::MAX)
                .collect();
            list.sort_unstable();
            list
        })
        .collect();
    Induced {
        graph: Graph::from_sorted_adjacency(adj),
        original: x.as_slice().to_vec(),
    }
}

/// `G[X, Y]`: the bipartite graph of edges between `x` and `y`. Vertices of
/// `x` become `0..|x|` and vertices of `y` follow.
pub fn induced_bipartite(g: &Graph, x: &VertexSet, y: &VertexSet) -> Result<Induced> {
    if !x.is_disjoint(y) {
        return Err(Error::invalid("bipartite extraction needs disjoint sets"));
    }
    let mut index = vec![u32::MAX; g.n()];
    let mut side = vec![0u8; g.n()];
    for (i, v) in x.iter().enumerate() {
        index[v] = i as u32;
        side[v] = 1;
    }
    for (i, v) in y.iter().enumerate() {
        index[v] = (x.len() + i) as u32;
        side[v] = 2;
    }
    let mut adj = Vec::with_capacity(x.len() + y.len());
    for (set, other) in [(x, 2u8), (y, 1u8)] {
        for v in set.iter() {
            let mut list: Vec<u32> = g
                .neighbors(v)
                .iter()
                .filter(|&&u| side[u as usize] == other)
                .map(|&u| index[u as usize])
                .collect();
            list.sort_unstable();
            adj.push(list);
        }
    }
    let mut original = x.as_slice().to_vec();
    original.extend(y.iter());
    Ok(Induced {
        graph: Graph::from_sorted_adjacency(adj),
        original,
    })
}

/// A read-only view of a graph with some vertices masked out. The parent
/// graph is never modified.
#[derive(Clone, Debug)]
pub struct MaskedView<'g> {
    graph: &'g Graph,
    alive: Vec<bool>,
    alive_count: usize,
}

impl<'g> MaskedView<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        MaskedView {
            graph,
            alive: vec![true; graph.n()],
            alive_count: graph.n(),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    #[inline]
    pub fn is_alive(&self, v: usize) -> bool {
        self.alive[v]
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    /// Masks `v`; returns false if it was already masked.
    pub fn remove(&mut self, v: usize) -> bool {
        let was = std::mem::replace(&mut self.alive[v], false);
        self.alive_count -= was as usize;
        was
    }

    pub fn alive_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.graph
            .neighbors(v)
            .iter()
            .map(|&u| u as usize)
            .filter(|&u| self.alive[u])
    }
}
