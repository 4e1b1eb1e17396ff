//! End-to-end tests of the `explore` binary: subcommands, report formats,
//! overrides, and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn explore() -> Command {
    Command::new(env!("CARGO_BIN_EXE_explore"))
}

fn demo_instance_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("instances/demo.json")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn truth_prints_winners_and_hardness() {
    let out = explore()
        .args(["truth", "--instance"])
        .arg(demo_instance_path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("borda winner: [0, 4]"));
    assert!(text.contains("condorcet winner: [1, 4]"));
    assert!(text.contains("width: 4"));
    assert!(text.contains("h_borda: 819.1111"));
}

#[test]
fn truth_json_round_trips() {
    let out = explore()
        .args(["truth", "--json", "--instance"])
        .arg(demo_instance_path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["class_size"], 5);
    assert_eq!(v["width"], 4);
}

#[test]
fn run_emits_csv_with_stable_columns() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(demo_instance_path(), dir.path().join("demo.json")).unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"instance": "demo.json", "algorithm": "borda-pac", "delta": 0.2,
            "epsilon": 0.2, "trials": 3, "base_seed": 7}"#,
    );
    let out_path = dir.path().join("report.csv");
    let out = explore()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--format", "csv", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,algorithm,delta,epsilon,samples,correct,stop_reason,wall_ms"
    );
    assert_eq!(lines.count(), 3);
    assert!(csv.contains("borda-pac"));
}

#[test]
fn run_emits_json_and_honors_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(demo_instance_path(), dir.path().join("demo.json")).unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"instance": "demo.json", "algorithm": "borda-pac", "delta": 0.2,
            "epsilon": 0.2, "trials": 5, "base_seed": 7}"#,
    );
    let out = explore()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--format", "json", "--trials", "2", "--algorithm", "car-cond", "--seed", "11"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["algorithm"], "car-cond");
    assert_eq!(v["trials"].as_array().unwrap().len(), 2);
    assert_eq!(v["trials"][0]["seed"], 11);
    assert_eq!(v["trials"][0]["env"]["generator"], "chacha8");
}

#[test]
fn oracle_eval_with_constraint_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(demo_instance_path(), dir.path().join("demo.json")).unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"instance": "demo.json", "algorithm": "oracle-eval", "delta": 0.1, "trials": 1}"#,
    );
    let out = explore()
        .args(["run", "--config"])
        .arg(&cfg)
        .args([
            "--format",
            "json",
            "--eps",
            "0.05",
            "--constraints",
            r#"{"accepted":[1]}"#,
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = v["trials"][0]["value"].as_f64().unwrap();
    assert!((value - 0.5).abs() <= 0.05);
    assert_eq!(v["trials"][0]["correct"], true);
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown algorithm.
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"instance": "demo.json", "algorithm": "quicksort", "delta": 0.1}"#,
    );
    let out = explore().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("borda-pac"), "error should list choices: {err}");

    // Missing config file.
    let out = explore()
        .args(["run", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Invalid parameter combination.
    let cfg = write(
        dir.path(),
        "bad2.json",
        r#"{"instance": "demo.json", "algorithm": "car-verify", "delta": 0.5}"#,
    );
    let out = explore().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_failures_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(demo_instance_path(), dir.path().join("demo.json")).unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"instance": "demo.json", "algorithm": "car-cond", "delta": 0.1,
            "trials": 1, "base_seed": 3, "sample_cap": 50}"#,
    );
    let out = explore().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let csv = String::from_utf8_lossy(&out.stdout);
    assert!(csv.contains("budget-exceeded"));
}
