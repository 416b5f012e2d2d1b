use std::collections::VecDeque;

use super::{extend_to_maximal, Matching};
use crate::graph::Graph;

const NONE: usize = usize::MAX;

/// Maximum cardinality matching by Edmonds' blossom algorithm.
///
/// Starts from a greedy maximal matching and grows it one augmenting path
/// at a time. A vertex from which no augmenting path exists never gains
/// one later, so each vertex is searched from at most once.
pub fn max_matching(g: &Graph) -> Matching {
    let mut solver = Blossom::new(g);
    for v in 0..g.n() {
        if solver.mate[v] == NONE {
            if let Some(end) = solver.find_path(v) {
                solver.augment(end);
            }
        }
    }
    let mate: Vec<Option<usize>> = solver
        .mate
        .iter()
        .map(|&m| (m != NONE).then_some(m))
        .collect();
    Matching::from_mates(&mate)
}

struct Blossom<'g> {
    g: &'g Graph,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    lca_mark: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'g> Blossom<'g> {
    fn new(g: &'g Graph) -> Self {
        let n = g.n();
        let greedy = extend_to_maximal(g, &Matching::default());
        let mut mate = vec![NONE; n];
        for &(u, v) in greedy.edges() {
            mate[u] = v;
            mate[v] = u;
        }
        Blossom {
            g,
            mate,
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            lca_mark: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&mut self, mut a: usize, mut b: usize) -> usize {
        self.lca_mark.fill(false);
        loop {
            a = self.base[a];
            self.lca_mark[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if self.lca_mark[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// BFS over alternating trees rooted at `root`; returns the free vertex
    /// at the end of an augmenting path.
    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.g.n();
        self.used.fill(false);
        self.parent.fill(NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in self.g.neighbors(v) {
                let to = to as usize;
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || self.mate[to] != NONE && self.parent[self.mate[to]] != NONE {
                    let cur = self.lca(v, to);
                    self.in_blossom.fill(false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let m = self.mate[to];
                    self.used[m] = true;
                    self.queue.push_back(m);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let next = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::is_maximal;

    fn size(g: &Graph) -> usize {
        let m = max_matching(g);
        assert!(m.is_valid_in(g));
        assert!(is_maximal(g, &m).unwrap());
        m.size()
    }

    #[test]
    fn small_graphs() {
        assert_eq!(size(&Graph::path(4)), 2);
        assert_eq!(size(&Graph::complete(4)), 2);
        assert_eq!(size(&Graph::petersen()), 5);
        assert_eq!(size(&Graph::empty(5)), 0);
        assert_eq!(size(&Graph::star(7)), 1);
        assert_eq!(size(&Graph::cycle(7)), 3);
    }

    #[test]
    fn needs_blossom_contraction() {
        // Triangle 0-1-2 with pendant paths; greedy picks (0,1) and a
        // blossom must be shrunk to reach the perfect matching.
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (2, 3), (0, 4), (1, 5)]).unwrap();
        assert_eq!(size(&g), 3);
    }
}
