use nearpm::generate::{generate, GeneratorKind, GeneratorSpec};
use nearpm::graph::{edge_density, Graph, VertexSet};
use nearpm::regularity::{
    certify_pair, min_witness_size, refine_partition, CertifyMode, Verdict, DEVIATION_TOL,
};
use proptest::prelude::*;

fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    generate(&GeneratorSpec::new(
        GeneratorKind::Quasirandom { n, p, eps: 0.1 },
        seed,
    ))
    .unwrap()
}

fn check_witness(g: &Graph, x: &VertexSet, y: &VertexSet, eps: f64) -> Result<(), TestCaseError> {
    let r = certify_pair(g, x, y, eps).unwrap();
    if let Some(w) = &r.witness {
        prop_assert_eq!(r.verdict, Verdict::Irregular);
        let wx = VertexSet::new(g, w.x.iter().copied()).unwrap();
        let wy = VertexSet::new(g, w.y.iter().copied()).unwrap();
        prop_assert!(w.x.iter().all(|&v| x.contains(v)) && w.y.iter().all(|&v| y.contains(v)));
        prop_assert!(wx.len() >= min_witness_size(x.len(), eps));
        prop_assert!(wy.len() >= min_witness_size(y.len(), eps));
        let d = edge_density(g, &wx, &wy).unwrap();
        prop_assert!((d - w.density).abs() < 1e-12);
        prop_assert!((d - r.density).abs() >= eps - DEVIATION_TOL);
    } else {
        prop_assert_eq!(r.verdict, Verdict::Regular);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn witnesses_recheck_small(seed in 0u64..1000, a in 2usize..=10, b in 2usize..=10, p in 0.1f64..0.9, eps in 0.1f64..0.5) {
        let g = random_graph(a + b, p, seed);
        let x = VertexSet::range(0..a);
        let y = VertexSet::range(a..a + b);
        prop_assert_eq!(certify_pair(&g, &x, &y, eps).unwrap().mode, CertifyMode::Exhaustive);
        check_witness(&g, &x, &y, eps)?;
    }

    #[test]
    fn witnesses_recheck_large(seed in 0u64..1000, a in 20usize..=40, p in 0.2f64..0.8, eps in 0.05f64..0.3) {
        let g = random_graph(2 * a, p, seed);
        check_witness(&g, &VertexSet::range(0..a), &VertexSet::range(a..2 * a), eps)?;
    }

    #[test]
    fn index_never_drops(seed in 0u64..1000, n in 20usize..120, p in 0.1f64..0.9, k0 in 2usize..6) {
        let g = random_graph(n, p, seed);
        let r = refine_partition(&g, 0.2, k0, 32).unwrap();
        for w in r.index_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "{:?}", r.index_trace);
        }
        prop_assert!(r.partition.is_equitable());
        prop_assert_eq!(r.partition.n(), n);
        prop_assert_eq!(r.reports.len(), r.partition.k() * (r.partition.k() - 1) / 2);
    }
}

#[test]
fn planted_blocks_become_regular() {
    // two disjoint dense blocks joined sparsely
    let spec = GeneratorSpec::new(
        GeneratorKind::Generalized {
            n: 80,
            matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            eps: 0.1,
        },
        0,
    );
    let g = generate(&spec).unwrap();
    let r = refine_partition(&g, 0.25, 2, 16).unwrap();
    assert!(r.is_regular_partition());
    assert!(!r.cap_hit);
}
