//! Drives the `eas` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"task = "density-experiment"
d = 3
seed = 3
output_dir = "out"
n_train = 100
n_val = 100
n_test = 100
expansion_factors = [8]
estimators = ["eas"]

[mixture]
components = [{ kappa = 10.0 }]
"#;

fn eas(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eas"))
        .current_dir(dir)
        .env("EAS_THREADS", "1")
        .args(args)
        .output()
        .unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    dir
}

#[test]
fn experiment_writes_results_and_manifest() {
    let dir = setup();
    let out = eas(dir.path(), &["experiment", "-c", "c.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 3);
    assert!(manifest["library"]["version"].is_string());
}

#[test]
fn flags_override_config_keys() {
    let dir = setup();
    let out = eas(dir.path(), &["experiment", "-c", "c.toml", "--seed", "8", "--output-dir", "other"]);
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("other/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 8);
}

#[test]
fn invalid_config_exits_nonzero_with_lines() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.toml"), CONFIG.replace("n_train = 100", "n_train = -1")).unwrap();
    let out = eas(dir.path(), &["experiment", "-c", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5: n_train"), "{err}");
}

#[test]
fn fit_then_eval_points() {
    let dir = setup();
    let out = eas(dir.path(), &["fit", "-c", "c.toml", "--m", "50", "--k", "5", "--model", "m.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(dir.path().join("q.csv"), "x0,x1,x2\n0,0,1\n1,0,0\n").unwrap();
    let out = eas(dir.path(), &["eval", "--model", "m.json", "--points", "q.csv"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().next(), Some("x0,x1,x2,fhat"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn modes_and_diagnostics_run() {
    let dir = setup();
    let out = eas(dir.path(), &["modes", "-c", "c.toml", "--output-dir", "modes"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let modes = std::fs::read_to_string(dir.path().join("modes/modes.csv")).unwrap();
    assert!(modes.starts_with("schema_version,mode_rank,sample_index,x0,x1,x2,fhat,discovery_level"));
    let out = eas(
        dir.path(),
        &["diagnostics", "--d", "3", "--seed", "1", "--m", "100", "--k", "10", "--output-dir", "diag", "--set", "diagnostics.probes=5000"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("diag/regions.csv").exists());
}

#[test]
fn rate_runs_on_a_small_grid() {
    let dir = setup();
    let out = eas(
        dir.path(),
        &["rate", "-c", "c.toml", "--set", "rate.n_grid=[50, 100]", "--set", "rate.family=\"mode\"", "--trials", "3"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rate = std::fs::read_to_string(dir.path().join("out/rate_summary.csv")).unwrap();
    assert_eq!(rate.lines().count(), 3);
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = setup();
    let out = Command::new(env!("CARGO_BIN_EXE_eas"))
        .current_dir(dir.path())
        .env("EAS_THREADS", "zero")
        .args(["experiment", "-c", "c.toml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
