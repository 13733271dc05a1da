use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twostage"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gate_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["rate", "--problem", "changepoint", "--xi", "0.25", "--gamma", "0.6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("γ < 1−2ξ"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["rate", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["rate", "--problem", "wiggle"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_names_json_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"two_stage": {"gamma": "high"}}"#).unwrap();
    let o = run(dir.path(), &["simulate", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("two_stage.gamma"), "{}", stderr(&o));

    std::fs::write(dir.path().join("extra.json"), r#"{"model": {"wobble": 1}}"#).unwrap();
    let o = run(dir.path(), &["simulate", "--config", "extra.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model"), "{}", stderr(&o));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"reps": 40, "two_stage": {"n": 2048}}"#).unwrap();
    let o = run(dir.path(), &["simulate", "--config", "c.json", "--reps", "7", "--out", "s"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["reps"], 7);
    assert_eq!(report["config"]["two_stage"]["n"], 2048);
    let csv = std::fs::read_to_string(dir.path().join("s.data.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn rate_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["rate", "--problem", "changepoint", "--xi", "0.25", "--gamma", "0.3", "--seed", "7"];
    assert_eq!(run(dir.path(), &args).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("rate-changepoint-seed7.data.csv")).unwrap();
    let first_json = std::fs::read(dir.path().join("rate-changepoint-seed7.report.json")).unwrap();
    assert_eq!(run(dir.path(), &args).status.code(), Some(0));
    assert_eq!(first, std::fs::read(dir.path().join("rate-changepoint-seed7.data.csv")).unwrap());
    assert_eq!(first_json, std::fs::read(dir.path().join("rate-changepoint-seed7.report.json")).unwrap());
    assert!(!first.contains(&b'\r'));
}

#[test]
fn limits_writes_one_row_per_draw_and_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["limits", "--drift", "abs", "--draws", "10000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("limits-seed1.data.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,value"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 10_000);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("limits-seed1.report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "limits");
    assert_eq!(report["version"], twostage::VERSION);
    assert_eq!(report["config"]["seed"], 1);
    assert_eq!(report["config"]["draws"], 10_000);
    assert_eq!(report["config"]["drift"]["shape"]["abs_slope"], 1.0);
}

#[test]
fn summary_line_reports_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["asymmetry", "--n-grid", "4096", "--reps", "50", "--out", "a"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("asymmetry: mean d1 = "), "{out}");
    assert!(out.contains("PASS") || out.contains("FAIL"));
}
