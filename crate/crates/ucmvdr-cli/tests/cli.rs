//! End-to-end tests of the `ucmvdr` binary: exit codes, stdout contracts and
//! file artifacts.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ucmvdr"))
}

fn workspace_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../paper_fig3.cfg")
}

#[test]
fn run_subcommand_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let output = binary()
        .args(["run", "--config"])
        .arg(workspace_config())
        .args(["--trials", "20", "--seed", "7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.contains("mean WNG"),
        "summary table missing: {stdout}"
    );
    for artifact in ["trials.csv", "summary.json", "ecdf_uc.csv"] {
        assert!(dir.path().join(artifact).is_file(), "missing {artifact}");
    }
}

#[test]
fn zeros_subcommand_emits_unit_radius_rows() {
    let dir = tempfile::tempdir().unwrap();
    let output = binary()
        .args(["zeros", "--config"])
        .arg(workspace_config())
        .args(["--method", "uc", "--seed", "7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("zeros_uc.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 10, "expected N - 1 = 10 zeros, got {rows:?}");
    for row in rows {
        let radius: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(radius, 1.0);
    }
}

#[test]
fn beampattern_subcommand_writes_requested_method() {
    let dir = tempfile::tempdir().unwrap();
    let output = binary()
        .args(["beampattern", "--config"])
        .arg(workspace_config())
        .args(["--method", "cbf", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(dir.path().join("beampattern_cbf.csv").is_file());
    assert!(!dir.path().join("beampattern_uc.csv").exists());
}

#[test]
fn calibrate_dl_prints_a_usable_factor() {
    let output = binary()
        .args(["calibrate-dl", "--config"])
        .arg(workspace_config())
        .args(["--pilot-trials", "150", "--seed", "9"])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    let delta_line = stdout
        .lines()
        .find(|l| l.starts_with("dl_factor = "))
        .unwrap_or_else(|| panic!("no dl_factor line in: {stdout}"));
    let delta: f64 = delta_line
        .trim_start_matches("dl_factor = ")
        .parse()
        .unwrap();
    assert!(delta > 0.0 && delta.is_finite());
    assert!(stdout.contains("pilot_uc_mean_wng = "));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = binary()
        .args(["run", "--config"])
        .arg(workspace_config())
        .arg("--definitely-not-a-flag")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn invalid_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "[array]\nn_sensors = 1\n").unwrap();
    let output = binary()
        .args(["run", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error"), "stderr: {stderr}");
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let output = binary()
        .args(["run", "--config", "/nonexistent/nope.cfg"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
