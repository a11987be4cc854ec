//! End-to-end checks of the `confrac` binary: config validation with line
//! numbers, exit codes, artifact layout, and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confrac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.conf");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn lists_all_experiments() {
    let out = run(&["--list-experiments"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in ["dtn", "iterated", "singular", "poisson", "jets", "qgamma", "sweep"] {
        assert!(stdout.lines().any(|l| l == name), "missing {name}");
    }
}

#[test]
fn requires_config_flag() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let out = run(&["--config", "/nonexistent/path.conf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_violations_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[experiment]\ngamma = 0.3\ngamma = 0.4\nbogus = 1\n",
    );
    let out = run(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
    assert!(stderr.contains("duplicate"), "stderr: {stderr}");
    assert!(stderr.contains("line 4"), "stderr: {stderr}");
    assert!(stderr.contains("bogus"), "stderr: {stderr}");
}

#[test]
fn rejects_order_outside_admissible_range() {
    let dir = tempfile::tempdir().unwrap();
    // gamma = 2.5 needs n > 5; n = 3 caps the order at 1.5
    let cfg = write_config(dir.path(), "[experiment]\ngamma = 2.5\nn = 3\n");
    let out = run(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("2.5"), "stderr: {stderr}");
}

#[test]
fn empty_config_exits_clean_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# empty suite\n");
    let out_dir = dir.path().join("out");
    let out = run(&["--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("0 rows"), "stdout: {stdout}");
    assert!(!out_dir.exists());
}

const SMALL_SUITE: &str = "\
[experiment]
experiment = sweep
gamma = 1.25, 2.5
n = 7
tolerance = 1e-10

[experiment]
experiment = jets
gamma = 0.3, 1.25
n = 3
tolerance = 1e-12
seed = 9
";

#[test]
fn writes_expected_artifacts_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SUITE);
    let out_dir = dir.path().join("out");
    let out = run(&["--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("01_sweep.csv").exists());
    assert!(out_dir.join("02_jets.csv").exists());
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("sweep"), "{summary}");
    assert!(summary.contains("PASS"), "{summary}");
    assert!(!summary.contains("FAIL"), "{summary}");
    let csv = fs::read_to_string(out_dir.join("02_jets.csv")).unwrap();
    assert!(csv.starts_with("# confrac csv v1"), "{csv}");
    assert!(csv.contains("seed=9"), "{csv}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SUITE);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert!(run(&["--config", &cfg, "--out", out_a.to_str().unwrap()]).status.success());
    assert!(run(&["--config", &cfg, "--out", out_b.to_str().unwrap()]).status.success());
    for name in ["01_sweep.csv", "02_jets.csv", "summary.txt"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}

#[test]
fn seed_override_changes_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SUITE);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "123",
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(out_dir.join("02_jets.csv")).unwrap();
    assert!(csv.contains("seed=123"), "{csv}");
}
