use nearpm::generate::{generate, GeneratorKind, GeneratorSpec};
use nearpm::graph::{edge_density, VertexSet};
use nearpm::io::{graph_to_string, read_graph};

#[test]
fn bipartite_density_band_over_seeds() {
    let n = 200;
    let x = VertexSet::range(0..n);
    let y = VertexSet::range(n..2 * n);
    for seed in 0..30 {
        let spec = GeneratorSpec::new(
            GeneratorKind::BipartiteRegular {
                n,
                p: 0.5,
                eps: 0.1,
            },
            seed,
        );
        let g = generate(&spec).unwrap();
        let d = edge_density(&g, &x, &y).unwrap();
        // four standard deviations of a mean of 40000 coins
        assert!((d - 0.5).abs() < 0.01, "seed {seed}: density {d}");
        assert!(edge_density(&g, &x, &x).is_err());
    }
}

#[test]
fn quasirandom_density_band_over_seeds() {
    let n = 240;
    let x = VertexSet::range(0..n / 2);
    let y = VertexSet::range(n / 2..n);
    for seed in 0..30 {
        let spec = GeneratorSpec::new(
            GeneratorKind::Quasirandom {
                n,
                p: 0.3,
                eps: 0.1,
            },
            seed,
        );
        let g = generate(&spec).unwrap();
        let d = edge_density(&g, &x, &y).unwrap();
        assert!((d - 0.3).abs() < 0.02, "seed {seed}: density {d}");
    }
}

#[test]
fn spec_json_round_trip_and_determinism() {
    let text = r#"{"kind":"generalized","params":{"n":60,"matrix":[[0.2,0.9],[0.9,0.4]],"eps":0.1},"seed":11}"#;
    let spec: GeneratorSpec = serde_json::from_str(text).unwrap();
    assert_eq!(serde_json::to_string(&spec).unwrap(), text);
    let a = graph_to_string(&generate(&spec).unwrap());
    let b = graph_to_string(&generate(&spec).unwrap());
    assert_eq!(a, b);
    assert_eq!(graph_to_string(&read_graph(a.as_bytes()).unwrap()), a);
}

#[test]
fn tightness_construction_shape() {
    let spec = GeneratorSpec::new(
        GeneratorKind::TightnessCounterexample {
            n: 60,
            parts: 6,
            eps: Some(1.0 / 3.0),
        },
        0,
    );
    let g = generate(&spec).unwrap();
    // two complete bipartite pairs of 10 + 10 and two 10-cliques
    assert_eq!(g.edge_count(), 2 * 100 + 2 * 45);
    let bad = GeneratorSpec::new(
        GeneratorKind::TightnessCounterexample {
            n: 60,
            parts: 6,
            eps: Some(0.2),
        },
        0,
    );
    assert!(generate(&bad).is_err());
}
