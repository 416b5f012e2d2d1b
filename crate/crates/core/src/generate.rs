//! Seeded random and structured graph generators.
//!
//! Every generator draws independent coins from a ChaCha8 stream seeded by
//! [`GeneratorSpec::seed`], visiting vertex pairs in lexicographic order, so
//! the output is a pure function of the `GeneratorSpec`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Random bipartite graph with sides `0..n` and `n..2n`; every cross
    /// pair is an edge with probability `p`.
    BipartiteRegular { n: usize, p: f64, eps: f64 },
    /// Binomial random graph `G(n, p)`.
    Quasirandom { n: usize, p: f64, eps: f64 },
    /// `n` vertices in `m` equal consecutive blocks; a pair in blocks
    /// `(i, j)` is an edge with probability `matrix[i][j]`.
    Generalized {
        n: usize,
        matrix: Vec<Vec<f64>>,
        eps: f64,
    },
    /// The block construction on which the dense-graph lower bound loses a
    /// polynomial factor. `n` vertices in `K` consecutive blocks.
    TightnessCounterexample {
        n: usize,
        #[serde(rename = "K")]
        parts: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    #[serde(default)]
    pub seed: u64,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("{name} = {p} is not in [0, 1]")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps = {eps} is not in (0, 1)")));
    }
    Ok(())
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        GeneratorSpec { kind, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            GeneratorKind::BipartiteRegular { p, eps, .. }
            | GeneratorKind::Quasirandom { p, eps, .. } => {
                check_prob("p", *p)?;
                check_eps(*eps)
            }
            GeneratorKind::Generalized { n, matrix, eps } => {
                check_eps(*eps)?;
                let m = matrix.len();
                if m == 0 {
                    return Err(Error::invalid("density matrix is empty"));
                }
                if matrix.iter().any(|row| row.len() != m) {
                    return Err(Error::invalid("density matrix is not square"));
                }
                for i in 0..m {
                    for j in 0..m {
                        check_prob("matrix entry", matrix[i][j])?;
                        if matrix[i][j] != matrix[j][i] {
                            return Err(Error::invalid("density matrix is not symmetric"));
                        }
                    }
                }
                if n % m != 0 {
                    return Err(Error::invalid(format!(
                        "n = {n} is not divisible by the block count {m}"
                    )));
                }
                Ok(())
            }
            GeneratorKind::TightnessCounterexample { n, parts, eps } => {
                if *parts % 4 != 2 {
                    return Err(Error::invalid(format!("K = {parts} is not 2 mod 4")));
                }
                if n % parts != 0 {
                    return Err(Error::invalid(format!(
                        "n = {n} is not divisible by K = {parts}"
                    )));
                }
                if let Some(eps) = eps {
                    check_eps(*eps)?;
                    if (*parts as f64) < 2.0 / eps - 1e-9 {
                        return Err(Error::invalid(format!(
                            "K = {parts} is smaller than 2/eps = {}",
                            2.0 / eps
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Samples the graph described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Graph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let graph = match &spec.kind {
        GeneratorKind::BipartiteRegular { n, p, .. } => {
            let n = *n;
            sample(2 * n, |u, v| u < n && v >= n, |_, _| *p, &mut rng)
        }
        GeneratorKind::Quasirandom { n, p, .. } => sample(*n, |_, _| true, |_, _| *p, &mut rng),
        GeneratorKind::Generalized { n, matrix, .. } => {
            let block = n / matrix.len();
            sample(
                *n,
                |_, _| true,
                |u, v| matrix[u / block][v / block],
                &mut rng,
            )
        }
        GeneratorKind::TightnessCounterexample { n, parts, .. } => tightness(*n, *parts),
    };
    Ok(graph)
}

fn sample(
    n: usize,
    eligible: impl Fn(usize, usize) -> bool,
    prob: impl Fn(usize, usize) -> f64,
    rng: &mut ChaCha8Rng,
) -> Graph {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if !eligible(u, v) {
                continue;
            }
            let p = prob(u, v);
            let hit = if p >= 1.0 {
                true
            } else if p <= 0.0 {
                false
            } else {
                rng.random_bool(p)
            };
            if hit {
                adj[u].push(v as u32);
                adj[v].push(u as u32);
            }
        }
    }
    Graph::from_sorted_adjacency(adj)
}

/// Blocks are numbered from 1 in the construction. Blocks `1..=(K+2)/2`
/// are independent sets, paired as complete bipartite graphs
/// `(1,2), (3,4), ...`; blocks `(K+4)/2..=K` are cliques. Nothing else.
fn tightness(n: usize, parts: usize) -> Graph {
    let block = n / parts;
    let clique_from = (parts + 4) / 2;
    let part_of = |v: usize| v / block + 1;
    let paired = |i: usize, j: usize| {
        let (a, b) = (i.min(j), i.max(j));
        b == a + 1 && a % 2 == 1 && a <= parts / 2
    };
    let adj = (0..n)
        .map(|u| {
            let pu = part_of(u);
            (0..n)
                .filter(|&v| {
                    let pv = part_of(v);
                    v != u
                        && if pu == pv {
                            pu >= clique_from
                        } else {
                            paired(pu, pv)
                        }
                })
                .map(|v| v as u32)
                .collect()
        })
        .collect();
    Graph::from_sorted_adjacency(adj)
}

/// The consecutive equal blocks a generalized or tightness instance was
/// planted on.
pub fn planted_blocks(n: usize, parts: usize) -> Vec<VertexSet> {
    let block = n / parts;
    (0..parts)
        .map(|i| VertexSet::range(i * block..(i + 1) * block))
        .collect()
}

/// Zero-based block pairs that the tightness construction declares
/// irregular: `(i, i+1)` for odd one-based `i <= K/2`.
pub fn tightness_irregular_pairs(parts: usize) -> Vec<(usize, usize)> {
    (1..=parts / 2)
        .filter(|i| i % 2 == 1)
        .map(|i| (i - 1, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_density;

    #[test]
    fn generalized_with_unit_blocks_is_complete_bipartite() {
        let spec = GeneratorSpec::new(
            GeneratorKind::Generalized {
                n: 6,
                matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
                eps: 0.1,
            },
            3,
        );
        assert_eq!(generate(&spec).unwrap(), Graph::complete_bipartite(3, 3));
    }

    #[test]
    fn generalized_needs_divisible_n() {
        let spec = GeneratorSpec::new(
            GeneratorKind::Generalized {
                n: 7,
                matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
                eps: 0.1,
            },
            0,
        );
        assert!(matches!(generate(&spec), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rejects_asymmetric_matrix_and_bad_density() {
        let asym = GeneratorKind::Generalized {
            n: 4,
            matrix: vec![vec![0.0, 1.0], vec![0.5, 0.0]],
            eps: 0.1,
        };
        assert!(GeneratorSpec::new(asym, 0).validate().is_err());
        let bad = GeneratorKind::Quasirandom {
            n: 4,
            p: 1.5,
            eps: 0.1,
        };
        assert!(GeneratorSpec::new(bad, 0).validate().is_err());
    }

    #[test]
    fn tightness_parameter_checks() {
        let k = |parts, eps| {
            GeneratorSpec::new(
                GeneratorKind::TightnessCounterexample { n: 60, parts, eps },
                0,
            )
        };
        assert!(k(4, None).validate().is_err());
        assert!(k(6, Some(0.2)).validate().is_err());
        assert!(k(6, Some(1.0 / 3.0)).validate().is_ok());
        assert!(k(10, None).validate().is_ok());
    }

    #[test]
    fn bipartite_regular_is_deterministic() {
        let spec = GeneratorSpec::new(
            GeneratorKind::BipartiteRegular {
                n: 100,
                p: 0.5,
                eps: 0.1,
            },
            7,
        );
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.edges().all(|(u, v)| u < 100 && v >= 100));
    }

    #[test]
    fn tightness_block_structure() {
        let g = generate(&GeneratorSpec::new(
            GeneratorKind::TightnessCounterexample {
                n: 60,
                parts: 6,
                eps: None,
            },
            0,
        ))
        .unwrap();
        let blocks = planted_blocks(60, 6);
        let d = |i: usize, j: usize| edge_density(&g, &blocks[i], &blocks[j]).unwrap();
        assert_eq!(d(0, 1), 1.0);
        assert_eq!(d(2, 3), 1.0);
        assert_eq!(d(1, 2), 0.0);
        assert_eq!(d(4, 5), 0.0);
        // two complete bipartite pairs of 10x10, two cliques K_10
        assert_eq!(g.edge_count(), 2 * 100 + 2 * 45);
        assert_eq!(tightness_irregular_pairs(6), vec![(0, 1), (2, 3)]);
        assert_eq!(tightness_irregular_pairs(10), vec![(0, 1), (2, 3), (4, 5)]);
    }

    #[test]
    fn spec_json_shape() {
        let spec = GeneratorSpec::new(
            GeneratorKind::BipartiteRegular {
                n: 10,
                p: 0.5,
                eps: 0.1,
            },
            7,
        );
        let v = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["kind"], "bipartite-regular");
        assert_eq!(v["params"]["n"], 10);
        assert_eq!(v["seed"], 7);
        let back: GeneratorSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
    }
}
