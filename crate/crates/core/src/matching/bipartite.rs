use std::collections::VecDeque;

use super::Matching;
use crate::graph::Graph;

const INF: u32 = u32::MAX;

/// Hopcroft–Karp maximum matching. `left[v]` marks one side of the
/// bipartition; edges inside a side are ignored.
pub fn hopcroft_karp(g: &Graph, left: &[bool]) -> Matching {
    let n = g.n();
    assert_eq!(left.len(), n, "side mask must cover every vertex");
    let lefts: Vec<usize> = (0..n).filter(|&v| left[v]).collect();
    let mut mate: Vec<Option<usize>> = vec![None; n];
    let mut dist = vec![INF; n];
    let mut queue = VecDeque::new();

    loop {
        // Layer the free left vertices and everything reachable from them.
        queue.clear();
        for &u in &lefts {
            if mate[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                let v = v as usize;
                if left[v] {
                    continue;
                }
                match mate[v] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n];
        for &u in &lefts {
            if mate[u].is_none() {
                augment(g, left, u, &mut mate, &mut dist, &mut it);
            }
        }
    }
    Matching::from_mates(&mate)
}

fn augment(
    g: &Graph,
    left: &[bool],
    root: usize,
    mate: &mut [Option<usize>],
    dist: &mut [u32],
    it: &mut [usize],
) -> bool {
    // Iterative DFS along the layered graph.
    let mut stack = vec![root];
    let mut via: Vec<usize> = Vec::new();
    while let Some(&u) = stack.last() {
        let nbrs = g.neighbors(u);
        let mut advanced = false;
        while it[u] < nbrs.len() {
            let v = nbrs[it[u]] as usize;
            it[u] += 1;
            if left[v] {
                continue;
            }
            match mate[v] {
                None => {
                    via.push(v);
                    // Flip the path root -> ... -> u -> v.
                    for (&x, &y) in stack.iter().zip(via.iter()) {
                        mate[x] = Some(y);
                        mate[y] = Some(x);
                    }
                    return true;
                }
                Some(w) if dist[w] == dist[u] + 1 => {
                    via.push(v);
                    stack.push(w);
                    advanced = true;
                    break;
                }
                Some(_) => {}
            }
        }
        if !advanced {
            dist[u] = INF;
            stack.pop();
            via.pop();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves(a: usize, b: usize) -> Vec<bool> {
        (0..a + b).map(|v| v < a).collect()
    }

    #[test]
    fn complete_bipartite() {
        let g = Graph::complete_bipartite(3, 5);
        assert_eq!(hopcroft_karp(&g, &halves(3, 5)).size(), 3);
    }

    #[test]
    fn path_as_bipartite() {
        // 0-1-2-3-4-5 with even vertices on the left
        let g = Graph::path(6);
        let left: Vec<bool> = (0..6).map(|v| v % 2 == 0).collect();
        let m = hopcroft_karp(&g, &left);
        assert_eq!(m.size(), 3);
        assert!(m.is_valid_in(&g));
    }

    #[test]
    fn needs_rerouting() {
        // left 0,1,2; right 3,4,5; greedy 0-3 blocks 1 unless rerouted
        let g = Graph::from_edges(6, [(0, 3), (0, 4), (1, 3), (2, 4), (2, 5)]).unwrap();
        assert_eq!(hopcroft_karp(&g, &halves(3, 3)).size(), 3);
    }
}
