use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn unimix(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unimix"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.display().to_string()
}

#[test]
fn table1_is_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write_config(a.path(), r#"{"n_grid":[10,50,100],"replications":5,"seed":3}"#);
    let first = unimix(a.path(), &["--config", &cfg, "table1"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = unimix(b.path(), &["--config", &cfg, "--threads", "2", "table1"]);
    assert!(second.status.success());
    for name in ["table1.json", "table1.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("table1.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 3);
    assert!(report["version"].as_str().unwrap().starts_with("unimix "));
    assert_eq!(report["rows"].as_array().unwrap().len(), 15);
}

#[test]
fn seed_override_changes_rows_not_layout() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write_config(a.path(), r#"{"n_grid":[40],"replications":2}"#);
    assert!(unimix(a.path(), &["--config", &cfg, "--seed", "1", "consistency"]).status.success());
    assert!(unimix(b.path(), &["--config", &cfg, "--seed", "2", "consistency"]).status.success());
    let ra: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("consistency.json")).unwrap()).unwrap();
    let rb: serde_json::Value = serde_json::from_slice(&fs::read(b.path().join("consistency.json")).unwrap()).unwrap();
    assert_ne!(ra["rows"], rb["rows"]);
    assert_eq!(ra["rows"].as_array().unwrap().len(), rb["rows"].as_array().unwrap().len());
}

#[test]
fn surface_writes_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    // c_3 = exp(-3^0.93) is about 0.062, so the plateaus separate only when
    // the draws are more than 2 c_3 apart; seed 3 gives 0.08, 0.43 and 0.81.
    let cfg = write_config(dir.path(), r#"{"n":3,"grid_size":20,"seed":3}"#);
    let out = unimix(dir.path(), &["--config", &cfg, "surface"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("surface.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("surface.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["plateaus_at_smallest_half_width"], 3);
}

#[test]
fn sample_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert!(unimix(dir.path(), &["--seed", "9", "sample", "--n", "30"]).status.success());
    let input = dir.path().join("sample.csv").display().to_string();
    let out = unimix(dir.path(), &["fit", "--input", &input, "--m", "2", "--log-c-lower", "-5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["fit"]["params"]["weights"].as_array().unwrap().len(), 2);
    assert_eq!(fit["fit"]["mode"], "exact");
    let profile = unimix(dir.path(), &["fit", "--input", &input, "--mode", "profile"]);
    assert!(profile.status.success());
}

#[test]
fn verify_passes_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"checks":["okamoto","covering"],"trials":20}"#);
    let out = unimix(dir.path(), &["--config", &cfg, "verify"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"schedule":{"c0":1.0,"d":2.0}}"#);
    assert_eq!(unimix(dir.path(), &["--config", &bad, "table1"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json").display().to_string();
    let out = unimix(dir.path(), &["--config", &missing, "table1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
    let zero = write_config(dir.path(), r#"{"replications":0}"#);
    assert_eq!(unimix(dir.path(), &["--config", &zero, "table1"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = unimix(&blocker.join("sub"), &["sample", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sub"));
}
