use std::process::Command;

fn nearpm(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nearpm"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn census_reports_nm_on_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("p3.txt");
    std::fs::write(&graph, "3 2\n0 1\n1 2\n").unwrap();
    let out = nearpm(&["census", graph.to_str().unwrap(), "--eps", "0.34"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nm_of_eps"], 2);
    assert_eq!(v["total"], 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "3 1\n0 7\n").unwrap();
    assert_eq!(
        nearpm(&["census", bad.to_str().unwrap()]).status.code(),
        Some(1)
    );

    let big = dir.path().join("big.txt");
    let gen = nearpm(&[
        "generate",
        "--kind",
        "quasirandom",
        "--n",
        "30",
        "--p",
        "0.5",
        "--out",
        big.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    assert_eq!(
        nearpm(&["census", big.to_str().unwrap()]).status.code(),
        Some(2)
    );

    assert_eq!(nearpm(&["pipeline"]).status.code(), Some(1));
    assert_eq!(nearpm(&["--help"]).status.code(), Some(0));
}

#[test]
fn pipeline_on_a_complete_graph() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let gen = nearpm(&[
        "generate",
        "--kind",
        "quasirandom",
        "--n",
        "16",
        "--p",
        "1",
        "--out",
        graph.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let out = nearpm(&["pipeline", graph.to_str().unwrap(), "--eps", "0.25"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["outcome"], "bound");
    assert!(v.get("timings").is_none());
}
