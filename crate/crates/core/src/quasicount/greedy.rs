use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PhasePlan;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::matching::{extend_to_maximal, Matching};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    /// 1-based, main phases first.
    pub phase: usize,
    pub tail: bool,
    /// Side size the typical band and the count factors refer to.
    pub reference_size: f64,
    pub typical: usize,
    pub removals: usize,
    /// Contribution of this phase to `log_count`.
    pub log_count: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub plan: PhasePlan,
    /// Natural log of the product of guaranteed choice counts.
    pub log_count: f64,
    /// The phased matching extended greedily to a maximal one.
    pub matching: Matching,
    /// Edges added by the maximal extension.
    pub extension_edges: usize,
    /// Vertices of `X` not matched by the phases.
    pub remaining_x: usize,
    pub phases: Vec<PhaseRecord>,
}

/// Vertices of `x` whose degree into `y` lies in
/// `[(1−δ) p n s, (1+δ) p n s]` with `n = |x|` and `s = shrink`.
pub fn typical_vertices(
    g: &Graph,
    x: &VertexSet,
    y: &VertexSet,
    p: f64,
    delta: f64,
    shrink: f64,
) -> Result<VertexSet> {
    if !x.is_disjoint(y) {
        return Err(Error::invalid("typical vertices need disjoint sides"));
    }
    let mut in_y = vec![false; g.n()];
    for v in y.iter() {
        in_y[v] = true;
    }
    let reference = p * x.len() as f64 * shrink;
    let (lo, hi) = ((1.0 - delta) * reference, (1.0 + delta) * reference);
    let members = x.iter().filter(|&v| {
        let d = g.neighbors(v).iter().filter(|&&u| in_y[u as usize]).count() as f64;
        lo <= d && d <= hi
    });
    Ok(VertexSet::from_sorted(members.collect()))
}

/// Runs the phased greedy on the pair `(x, y)`, accumulating the log of the
/// guaranteed number of choices at each step. Vertex choices are seeded;
/// `log_count` depends only on the plan and on which phases complete.
pub fn greedy_count_bipartite(
    g: &Graph,
    x: &VertexSet,
    y: &VertexSet,
    p: f64,
    eps: f64,
    seed: u64,
) -> Result<GreedyTrace> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "sides have {} and {} vertices",
            x.len(),
            y.len()
        )));
    }
    if !x.is_disjoint(y) {
        return Err(Error::invalid("greedy counting needs disjoint sides"));
    }
    let plan = PhasePlan::new(x.len(), p, eps)?;
    let mut state = State::new(g, x, y, seed);
    let mut phases = Vec::new();
    let mut log_count = 0.0;
    let rate = plan.rate();

    for i in 1..=plan.k {
        let reference = plan.nominal_size(i);
        let record = state.run_phase(
            i,
            false,
            reference,
            plan.delta,
            plan.p,
            plan.main_removals,
            |j| rate * reference - j as f64 + 1.0,
        )?;
        log_count += record.log_count;
        phases.push(record);
    }
    let stop_at = eps.sqrt() * plan.n as f64;
    for i in 1..=plan.t {
        let size = state.remaining_x as f64;
        if size <= stop_at {
            break;
        }
        let removals = (rate * size + super::FLOOR_SLACK).floor() as usize;
        let record =
            state.run_phase(plan.k + i, true, size, plan.delta, plan.p, removals, |j| {
                rate * size - j as f64 + 1.0
            })?;
        log_count += record.log_count;
        phases.push(record);
    }

    let phased = Matching::new(state.edges.iter().copied())?;
    let matching = extend_to_maximal(g, &phased);
    Ok(GreedyTrace {
        extension_edges: matching.size() - phased.size(),
        remaining_x: state.remaining_x,
        plan,
        log_count,
        matching,
        phases,
    })
}

struct State<'g> {
    g: &'g Graph,
    x: Vec<usize>,
    x_alive: Vec<bool>,
    in_y: Vec<bool>,
    y_alive: Vec<bool>,
    /// Degree of each vertex of `X` into the alive part of `Y`.
    degree: Vec<usize>,
    remaining_x: usize,
    edges: Vec<(usize, usize)>,
    rng: ChaCha8Rng,
}

impl<'g> State<'g> {
    fn new(g: &'g Graph, x: &VertexSet, y: &VertexSet, seed: u64) -> Self {
        let n = g.n();
        let mut in_y = vec![false; n];
        for v in y.iter() {
            in_y[v] = true;
        }
        let mut degree = vec![0; n];
        for v in x.iter() {
            degree[v] = g.neighbors(v).iter().filter(|&&u| in_y[u as usize]).count();
        }
        let mut x_alive = vec![false; n];
        for v in x.iter() {
            x_alive[v] = true;
        }
        State {
            g,
            x: x.as_slice().to_vec(),
            x_alive,
            y_alive: in_y.clone(),
            in_y,
            degree,
            remaining_x: x.len(),
            edges: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn run_phase(
        &mut self,
        phase: usize,
        tail: bool,
        reference: f64,
        delta: f64,
        p: f64,
        removals: usize,
        factor: impl Fn(usize) -> f64,
    ) -> Result<PhaseRecord> {
        let (lo, hi) = ((1.0 - delta) * p * reference, (1.0 + delta) * p * reference);
        let mut typical: Vec<usize> = self
            .x
            .iter()
            .copied()
            .filter(|&v| self.x_alive[v] && (lo..=hi).contains(&(self.degree[v] as f64)))
            .collect();
        let typical_count = typical.len();
        let mut log_count = 0.0;
        for j in 1..=removals {
            let (v, u) = loop {
                if typical.is_empty() {
                    return Err(Error::DegradedInstance {
                        phase,
                        message: format!(
                            "typical set exhausted after {} of {removals} removals \
                             (band [{lo:.2}, {hi:.2}], {typical_count} typical at start)",
                            j - 1
                        ),
                    });
                }
                let v = typical.swap_remove(self.rng.random_range(0..typical.len()));
                let options: Vec<usize> = self
                    .g
                    .neighbors(v)
                    .iter()
                    .map(|&u| u as usize)
                    .filter(|&u| self.in_y[u] && self.y_alive[u])
                    .collect();
                if !options.is_empty() {
                    break (v, options[self.rng.random_range(0..options.len())]);
                }
            };
            self.take(v, u);
            log_count += factor(j).ln();
        }
        Ok(PhaseRecord {
            phase,
            tail,
            reference_size: reference,
            typical: typical_count,
            removals,
            log_count,
        })
    }

    fn take(&mut self, v: usize, u: usize) {
        self.x_alive[v] = false;
        self.remaining_x -= 1;
        self.y_alive[u] = false;
        for &w in self.g.neighbors(u) {
            let w = w as usize;
            if self.x_alive[w] {
                self.degree[w] -= 1;
            }
        }
        self.edges.push((v.min(u), v.max(u)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasicount::lemma_a1_lower_bound;

    fn sides(n: usize) -> (VertexSet, VertexSet) {
        (VertexSet::range(0..n), VertexSet::range(n..2 * n))
    }

    #[test]
    fn typical_in_complete_and_empty() {
        let g = Graph::complete_bipartite(10, 10);
        let (x, y) = sides(10);
        assert_eq!(typical_vertices(&g, &x, &y, 1.0, 0.1, 1.0).unwrap(), x);
        let e = Graph::empty(20);
        assert!(typical_vertices(&e, &x, &y, 0.5, 0.1, 1.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn complete_bipartite_beats_product_bound() {
        let n = 200;
        let g = Graph::complete_bipartite(n, n);
        let (x, y) = sides(n);
        let t = greedy_count_bipartite(&g, &x, &y, 1.0, 0.04, 3).unwrap();
        assert!(t.matching.is_valid_in(&g));
        assert_eq!(t.matching.size(), n);
        let bound = lemma_a1_lower_bound(n, 1.0, 0.04).unwrap();
        assert!(t.log_count >= 0.95 * bound, "{} vs {bound}", t.log_count);
        let lower = (1.0 - 3.0 * 0.2) * n as f64 * (n as f64).ln();
        assert!(t.log_count >= lower);
    }

    #[test]
    fn isolated_vertices_degrade() {
        // half of X isolated, the rest complete to Y
        let n = 40;
        let edges = (0..n / 2).flat_map(|u| (n..2 * n).map(move |v| (u, v)));
        let g = Graph::from_edges(2 * n, edges).unwrap();
        let (x, y) = sides(n);
        let err = greedy_count_bipartite(&g, &x, &y, 0.5, 0.04, 0).unwrap_err();
        assert!(matches!(err, Error::DegradedInstance { .. }), "{err}");
    }

    #[test]
    fn same_seed_same_trace() {
        let g = Graph::complete_bipartite(50, 50);
        let (x, y) = sides(50);
        let a = greedy_count_bipartite(&g, &x, &y, 1.0, 0.04, 9).unwrap();
        let b = greedy_count_bipartite(&g, &x, &y, 1.0, 0.04, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unequal_sides_rejected() {
        let g = Graph::complete_bipartite(3, 4);
        let x = VertexSet::range(0..3);
        let y = VertexSet::range(3..7);
        assert!(greedy_count_bipartite(&g, &x, &y, 1.0, 0.04, 0).is_err());
    }
}
