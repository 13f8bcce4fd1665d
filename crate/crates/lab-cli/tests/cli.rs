//! End-to-end checks of the `lab` binary: exit codes, determinism, and the
//! index/render contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .env_remove("LAB_THREADS")
        .output()
        .expect("failed to launch lab")
}

fn write_manifest(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn empty_experiment_list_yields_an_empty_passing_index() {
    let dir = tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        "m.json",
        r#"{"kind": "formbound", "seed": 1, "experiments": []}"#,
    );
    let out_dir = dir.path().join("out");
    let out = lab(&["run", &manifest, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let index: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["artifacts"].as_array().unwrap().len(), 0);
    assert_eq!(index["pass_all"], Value::Bool(true));
}

const ORLICZ_MANIFEST: &str = r#"{
  "kind": "orlicz",
  "seed": 11,
  "experiments": [
    {"label": "gauge", "grid": {"points": 17, "half_width": 2.0},
     "random_fields": 3, "max_m": 3, "indicator_check": true}
  ]
}"#;

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let dir = tempdir().unwrap();
    let manifest = write_manifest(dir.path(), "m.json", ORLICZ_MANIFEST);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = lab(&["run", &manifest, "--out-dir", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    }
    let csv_a = fs::read(a.join("gauge_embedding.csv")).unwrap();
    let csv_b = fs::read(b.join("gauge_embedding.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "seeded run is not reproducible");
    assert!(!csv_a.is_empty());

    // a different seed must actually change the sampled fields
    let out = lab(&[
        "run",
        &manifest,
        "--seed",
        "12",
        "--out-dir",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv_c = fs::read(dir.path().join("c").join("gauge_embedding.csv")).unwrap();
    assert_ne!(csv_a, csv_c);
}

#[test]
fn unknown_manifest_fields_are_rejected_by_name() {
    let dir = tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        "m.json",
        r#"{"kind": "formbound", "seed": 1, "bogus_knob": 3, "experiments": []}"#,
    );
    let out = lab(&["run", &manifest]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("bogus_knob"),
        "diagnostic does not name the field: {}",
        stderr_of(&out)
    );
}

#[test]
fn formbound_report_carries_estimate_and_verdict() {
    let dir = tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        "m.json",
        r#"{
  "kind": "formbound",
  "seed": 5,
  "experiments": [
    {"label": "hardy", "drift": {"family": "hardy", "sign": "+", "d": 3, "delta": 1.0, "c": 0.0},
     "grid": {"points": 16, "half_width": 1.0},
     "verify_family": "gaussians", "verify_declared": [1.0, 0.0]}
  ]
}"#,
    );
    let out_dir = dir.path().join("out");
    let out = lab(&["run", &manifest, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let report: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("hardy_report.json")).unwrap())
            .unwrap();
    let delta_est = report["delta_est"].as_f64().unwrap();
    assert!(delta_est > 0.0 && delta_est < 4.0);
    assert_eq!(report["pass"], Value::Bool(true));
}

#[test]
fn failed_verification_exits_one_and_flags_the_artifact() {
    let dir = tempdir().unwrap();
    // declared delta far below the measured Rayleigh quotient on this grid
    let manifest = write_manifest(
        dir.path(),
        "m.json",
        r#"{
  "kind": "formbound",
  "seed": 5,
  "experiments": [
    {"label": "hardy", "drift": {"family": "hardy", "sign": "+", "d": 3, "delta": 1.0, "c": 0.0},
     "grid": {"points": 16, "half_width": 1.0},
     "verify_family": "hardy_optimizers", "verify_declared": [0.05, 0.0]}
  ]
}"#,
    );
    let out_dir = dir.path().join("out");
    let out = lab(&["run", &manifest, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("FAIL"));

    let index: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["pass_all"], Value::Bool(false));
}

#[test]
fn render_skips_missing_series_and_still_succeeds() {
    let dir = tempdir().unwrap();
    let index_path = dir.path().join("index.json");
    fs::write(
        &index_path,
        r#"{
  "kind": "formbound",
  "seed": 0,
  "artifacts": [
    {"label": "gone", "kind": "rayleigh", "path": "missing.csv", "pass": true}
  ],
  "pass_all": true
}"#,
    )
    .unwrap();
    let out = lab(&["render", index_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("skipped"));
    assert!(!dir.path().join("missing.svg").exists());
}

#[test]
fn render_of_an_empty_index_plots_nothing() {
    let dir = tempdir().unwrap();
    let index_path = dir.path().join("index.json");
    fs::write(
        &index_path,
        r#"{"kind": "formbound", "seed": 0, "artifacts": [], "pass_all": true}"#,
    )
    .unwrap();
    let out = lab(&["render", index_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("nothing to plot"));
}

#[test]
fn render_produces_svg_for_a_real_run() {
    let dir = tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        "m.json",
        r#"{
  "kind": "formbound",
  "seed": 5,
  "experiments": [
    {"label": "hardy", "drift": {"family": "hardy", "sign": "+", "d": 3, "delta": 1.0, "c": 0.0},
     "grid": {"points": 16, "half_width": 1.0}, "refine": [20]}
  ]
}"#,
    );
    let out_dir = dir.path().join("out");
    let out = lab(&["run", &manifest, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let index_path = out_dir.join("index.json");
    let out = lab(&["render", index_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let svg = fs::read_to_string(out_dir.join("hardy_rayleigh.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("</svg>"));
}

#[test]
fn garbage_thread_settings_are_validation_errors() {
    let dir = tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        "m.json",
        r#"{"kind": "formbound", "seed": 1, "experiments": []}"#,
    );

    let out = Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(["run", &manifest])
        .env("LAB_THREADS", "three")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("LAB_THREADS"));

    let out = lab(&["run", &manifest, "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
