//! End-to-end checks of the `wricci` binary: exit codes, file outputs,
//! flag overrides and the validate subcommand.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wricci"))
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn missing_config_exits_2_and_names_path() {
    let out = bin()
        .args(["curvature", "--config", "/nonexistent/exp.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/exp.json"), "stderr: {err}");
}

#[test]
fn invalid_constraint_exits_2_with_name() {
    let dir = std::env::temp_dir().join("wricci_cli_bad");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("bad.json");
    std::fs::write(
        &cfg_path,
        r#"{
        "manifold": {"kind": "euclidean", "dim": 2},
        "query": {"schedule": {"alpha": 0.25, "beta": 0.25, "a": 1.0, "b": 1.0}},
        "run": {"n_values": [50], "repeats": 1, "seed": 1}
    }"#,
    )
    .unwrap();
    let out = bin()
        .args(["rgg", "converge", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha + 2 beta"), "stderr: {err}");
}

#[test]
fn ot_solve_fixture_prints_json() {
    let out = bin()
        .args(["ot", "solve", "--source", &fixture("line_source.csv"), "--target", &fixture("line_target.csv")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert!((v["w1"].as_f64().unwrap() - 0.4).abs() < 1e-12, "{text}");
    assert!(v["gap"].as_f64().unwrap().abs() < 1e-10, "{text}");
}

#[test]
fn curvature_writes_csv_and_respects_seed_flag() {
    let dir = std::env::temp_dir().join("wricci_cli_curv");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("exp.json");
    std::fs::write(
        &cfg_path,
        r#"{
        "manifold": {"kind": "euclidean", "dim": 2},
        "potential": {"kind": "zero"},
        "query": {"delta": 0.3, "epsilon": 0.3},
        "run": {"cloud_size": 60, "repeats": 2, "seed": 4}
    }"#,
    )
    .unwrap();
    let out_path = dir.join("results.csv");
    let out = bin()
        .args([
            "curvature",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
            "--seed",
            "77",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed: 77"), "effective seed printed: {err}");
    assert!(err.contains("overrides"), "override logged: {err}");
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("manifold,dim,potential,delta,epsilon,cloud_size,repeats,seed,"));
    assert!(text.lines().nth(1).unwrap().starts_with("euclidean,2,zero,0.3,0.3,60,2,77,"));
}

#[test]
fn ot_solve_with_explicit_cost_matrix() {
    let dir = std::env::temp_dir().join("wricci_cli_cost");
    std::fs::create_dir_all(&dir).unwrap();
    let cost_path = dir.join("cost.csv");
    // Rows = source atoms, cols = target atoms; overrides the coordinates.
    std::fs::write(&cost_path, "0.0,2.0\n2.0,0.0\n").unwrap();
    let out = bin()
        .args([
            "ot",
            "solve",
            "--source",
            &fixture("line_source.csv"),
            "--target",
            &fixture("line_target.csv"),
            "--cost",
            cost_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stdout).trim()).unwrap();
    // Move 0.4 mass at cost 2 per unit.
    assert!((v["w1"].as_f64().unwrap() - 0.8).abs() < 1e-12);
}

#[test]
fn validate_accepts_manifold_flags() {
    let out = bin()
        .args(["validate", "ricci-ball", "--manifold", "sphere", "--dim", "2", "--samples", "50000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS") && text.contains("Sphere"), "{text}");
}

#[test]
fn validate_triangle_passes() {
    let out = bin().args(["validate", "triangle"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("PASS"), "{text}");
}

#[test]
fn validate_unknown_lemma_exits_2() {
    let out = bin().args(["validate", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converge_writes_table() {
    let dir = std::env::temp_dir().join("wricci_cli_conv");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("exp.json");
    std::fs::write(
        &cfg_path,
        r#"{
        "manifold": {"kind": "euclidean", "dim": 2},
        "potential": {"kind": "quadratic", "scale": 1.0},
        "query": {"schedule": {"alpha": 0.16666666666666666, "beta": 0.16666666666666666,
                                 "a": 0.4, "b": 0.4, "c_delta": 0.5, "c_epsilon": 0.2}},
        "run": {"n_values": [60, 120], "repeats": 2, "seed": 9},
        "output": {"path": "PLACEHOLDER", "format": "csv"}
    }"#
        .replace("PLACEHOLDER", dir.join("table.csv").to_str().unwrap())
        .as_str(),
    )
    .unwrap();
    let out = bin().args(["rgg", "converge", "--config", cfg_path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("table.csv")).unwrap();
    assert!(text.starts_with("n,repeat,delta_n,epsilon_n,num_points,connected,kappa,scaled_kappa,oracle,abs_error,seed"));
    assert_eq!(text.lines().count(), 1 + 4);
}
