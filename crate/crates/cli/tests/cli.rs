use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn orthotree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthotree")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn matrix(v: &Value) -> Vec<(f64, f64)> {
    v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e[0].as_f64().unwrap(), e[1].as_f64().unwrap()))
        .collect()
}

#[test]
fn decompose_sigma_z() {
    let out = orthotree(&["decompose", "--in", path(&fixture("sz.json"))]);
    assert!(out.status.success());
    let d: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(d["n"], 2);
    let lambdas: Vec<f64> = d["parts"].as_array().unwrap().iter().map(|p| p["lambda"].as_f64().unwrap()).collect();
    assert_eq!(lambdas, vec![-1.0, 1.0]);
    // λ = −1 ↔ e₂, λ = +1 ↔ e₁.
    assert_eq!(matrix(&d["parts"][0]["basis"]), vec![(0.0, 0.0), (1.0, 0.0)]);
    assert_eq!(matrix(&d["parts"][1]["basis"]), vec![(1.0, 0.0), (0.0, 0.0)]);
}

#[test]
fn decompose_then_synthesize_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["sz.json", "sx.json", "hermitian3.json"] {
        let input = fixture(name);
        let d = dir.path().join(format!("{name}.decomposition"));
        let m = dir.path().join(format!("{name}.matrix"));
        assert!(orthotree(&["decompose", "--in", path(&input), "--out", path(&d)]).status.success());
        assert!(orthotree(&["synthesize", "--in", path(&d), "--out", path(&m)]).status.success());
        let original: Value = serde_json::from_str(&std::fs::read_to_string(&input).unwrap()).unwrap();
        let rebuilt: Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
        assert_eq!(original["n"], rebuilt["n"]);
        let frob: f64 = matrix(&original)
            .iter()
            .zip(matrix(&rebuilt))
            .map(|(a, b)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(frob <= 1e-9, "{name}: {frob}");
    }
}

#[test]
fn measure_maximally_mixed() {
    let out = orthotree(&["measure", "--obs", path(&fixture("sz.json")), "--rho", path(&fixture("maxmixed2.json"))]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "lambda,multiplicity,probability\n-1,1,0.5\n1,1,0.5\n");
}

#[test]
fn measure_json_and_pure_state() {
    let out = orthotree(&[
        "measure",
        "--obs",
        path(&fixture("sz.json")),
        "--psi",
        path(&fixture("e1.json")),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let rows: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows[0]["probability"], 0.0);
    assert_eq!(rows[1]["probability"], 1.0);
}

#[test]
fn cdf_steps() {
    let (obs, psi) = (fixture("sz.json"), fixture("plus.json"));
    let args = ["cdf", "--obs", path(&obs), "--psi", path(&psi)];
    let out = orthotree(&args);
    assert_eq!(stdout(&out), "lambda,probability,cumulative\n-1,0.5,0.5\n1,0.5,1\n");
    let mut with_points = args.to_vec();
    with_points.extend(["--at", "-2,-1,0.5,1"]);
    let out = orthotree(&with_points);
    assert_eq!(stdout(&out), "r,cumulative\n-2,0\n-1,0.5\n0.5,0.5\n1,1\n");
}

#[test]
fn classify_vectors() {
    let obs = fixture("sz.json");
    let out = orthotree(&["classify", "--obs", path(&obs), "--vec", path(&fixture("e1.json"))]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["cell"], 1);
    let out = orthotree(&["classify", "--obs", path(&obs), "--vec", path(&fixture("plus.json"))]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["star"], true);
    assert!(v["value"].is_null());
}

#[test]
fn check_consistency_flags_constructed_violation() {
    let out = orthotree(&["check-consistency", "--in", path(&fixture("violating.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["consistent"], false);
    let violations = report["violations"].as_array().unwrap();
    // The shared line [e₁] disagrees (0.3 vs 0.4); its complement span{e₂, e₃}
    // is shared too and disagrees by the same amount.
    let line = violations
        .iter()
        .find(|v| v["cells_a"] == serde_json::json!([0]) && v["cells_b"] == serde_json::json!([0]))
        .expect("violation on [e1]");
    assert_eq!(line["prob_a"], 0.3);
    assert_eq!(line["prob_b"], 0.4);
    for v in violations {
        assert!((v["delta"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    }
}

#[test]
fn check_consistency_passes_trace_rule_input() {
    let out = orthotree(&["check-consistency", "--in", path(&fixture("consistent.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["consistent"], true);
    assert_eq!(report["violations"], serde_json::json!([]));
}

#[test]
fn tree_run_is_deterministic_and_writes_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let status = orthotree(&[
            "tree-run",
            "--contexts",
            path(&fixture("contexts.json")),
            "--q",
            path(&fixture("q.json")),
            "--seed",
            seed,
            "--samples",
            "200",
            "--out",
            path(&out),
        ]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        out
    };
    let a = run("11", "a.csv");
    let b = run("11", "b.csv");
    let c = run("12", "c.csv");
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_ne!(text, std::fs::read_to_string(&c).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sample_index,context_id,lambda"));
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], i.to_string());
        assert!(fields[1] == "z" || fields[1] == "x");
        let lambda: f64 = fields[2].parse().unwrap();
        assert!((lambda.abs() - 1.0).abs() < 1e-12);
    }
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["samples"], 200);
    assert!(meta["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn metaspace_table() {
    let out = orthotree(&["metaspace", "--contexts", path(&fixture("contexts.json")), "--q", path(&fixture("q.json"))]);
    assert!(out.status.success());
    let m: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let cells = m["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 6);
    assert!((m["total"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let prob = |id: &str, lambda: f64| {
        cells
            .iter()
            .find(|c| c["context_id"] == id && c["kind"] == "eigenspace" && (c["lambda"].as_f64().unwrap() - lambda).abs() < 1e-12)
            .unwrap()["probability"]
            .as_f64()
            .unwrap()
    };
    assert!((prob("z", 1.0) - 0.15).abs() < 1e-15);
    assert!((prob("z", -1.0) - 0.35).abs() < 1e-15);
    assert!((prob("x", 1.0) - 0.25).abs() < 1e-15);
    assert!(cells.iter().filter(|c| c["kind"] == "residual").all(|c| c["probability"] == 0.0));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "entries": [[1, 0], [2, 0], [0, 0], [1, 0]]}"#).unwrap();
    let out = orthotree(&["decompose", "--in", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = orthotree(&["measure", "--obs", path(&fixture("sz.json")), "--rho", path(&fixture("sz.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let out = orthotree(&["decompose", "--in", path(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_show_usage() {
    let out = orthotree(&["measure", "--obs", path(&fixture("sz.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = orthotree(&["decompose", "--in", path(&fixture("sz.json")), "--tol-cluster", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = orthotree(&["tree-run", "--contexts", "c.json", "--q", "q.json", "--samples", "3", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1), "seed is required");
    assert!(orthotree(&["--help"]).status.success());
}

#[test]
fn tolerance_override_merges_near_degenerate_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let near = dir.path().join("near.json");
    std::fs::write(&near, r#"{"n": 2, "entries": [[1, 0], [0, 0], [0, 0], [1.000001, 0]]}"#).unwrap();
    let parts = |extra: &[&str]| {
        let mut args = vec!["decompose", "--in", path(&near)];
        args.extend_from_slice(extra);
        let v: Value = serde_json::from_str(&stdout(&orthotree(&args))).unwrap();
        v["parts"].as_array().unwrap().len()
    };
    assert_eq!(parts(&[]), 2);
    assert_eq!(parts(&["--tol-cluster", "1e-3"]), 1);
}
