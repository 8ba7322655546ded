//! End-to-end tests of the `powerlaw` binary: exit codes, stream
//! conventions, config validation, and manifest reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powerlaw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const DENSITY_CONFIG: &str = r#"{
  "schema_version": 1, "kind": "density", "master_seed": 5,
  "params": {
    "kappa": 2.0, "sigma_g": 1.0, "sigma_h": 1.0,
    "grid": {"lo": -5.0, "hi": 5.0, "points": 101}
  }
}"#;

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn density_run_exits_zero_and_lists_the_files_it_wrote() {
    let work = TempDir::new().unwrap();
    let config = write_config(work.path(), "density.json", DENSITY_CONFIG);
    let out_dir = work.path().join("out");
    let out = run(&[
        "density",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_text(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let listed: Vec<&str> = stdout.lines().collect();
    assert_eq!(listed.len(), 3, "one line per written file: {stdout}");
    for line in &listed {
        assert!(Path::new(line).is_file(), "{line} was listed but not written");
    }
    for name in ["manifest.json", "density.csv", "density.json"] {
        assert!(out_dir.join(name).is_file(), "{name} missing");
    }
}

#[test]
fn emitted_csv_uses_comma_separator_dot_decimals_and_lf() {
    let work = TempDir::new().unwrap();
    let config = write_config(work.path(), "density.json", DENSITY_CONFIG);
    let out_dir = work.path().join("out");
    let out = run(&[
        "density",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_dir.join("density.csv")).unwrap();
    assert!(!csv.contains('\r'), "line endings must be bare LF");
    assert!(csv.ends_with('\n'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("w,density"));
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 2, "bad row {line}");
        for field in fields {
            field.parse::<f64>().unwrap_or_else(|_| panic!("unparseable number {field}"));
        }
    }
}

#[test]
fn manifest_fed_back_as_a_config_reproduces_every_byte() {
    let work = TempDir::new().unwrap();
    let config = write_config(work.path(), "density.json", DENSITY_CONFIG);
    let first = work.path().join("first");
    let again = work.path().join("again");
    let out = run(&[
        "density",
        "--config",
        config.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "density",
        "--config",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_text(&out));
    for name in ["manifest.json", "density.csv", "density.json"] {
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(again.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs after the round trip");
    }
}

#[test]
fn unknown_top_level_keys_are_rejected() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "bad.json",
        r#"{"schema_version": 1, "kind": "density", "typo_key": true,
            "params": {"kappa": 2.0, "sigma_g": 1.0, "sigma_h": 1.0,
                       "grid": {"lo": -1.0, "hi": 1.0, "points": 11}}}"#,
    );
    let out_dir = work.path().join("out");
    let out = run(&[
        "density",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr_text(&out).contains("unknown field"),
        "stderr: {}",
        stderr_text(&out)
    );
    assert!(!out_dir.exists(), "a rejected config must write nothing");
}

#[test]
fn unknown_param_keys_are_rejected() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "bad.json",
        r#"{"schema_version": 1, "kind": "density",
            "params": {"kappa": 2.0, "sigma_gg": 1.0, "sigma_g": 1.0, "sigma_h": 1.0,
                       "grid": {"lo": -1.0, "hi": 1.0, "points": 11}}}"#,
    );
    let out = run(&["density", "--config", config.to_str().unwrap(), "--out", "/tmp/nope"]);
    assert!(!out.status.success());
    assert!(stderr_text(&out).contains("unknown field"));
}

#[test]
fn unsupported_schema_version_is_rejected() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "bad.json",
        r#"{"schema_version": 2, "kind": "density",
            "params": {"kappa": 2.0, "sigma_g": 1.0, "sigma_h": 1.0,
                       "grid": {"lo": -1.0, "hi": 1.0, "points": 11}}}"#,
    );
    let out = run(&["density", "--config", config.to_str().unwrap(), "--out", "/tmp/nope"]);
    assert!(!out.status.success());
    assert!(stderr_text(&out).contains("schema_version"));
}

#[test]
fn subcommand_and_config_kind_must_agree() {
    let work = TempDir::new().unwrap();
    let config = write_config(work.path(), "density.json", DENSITY_CONFIG);
    let out = run(&["simulate", "--config", config.to_str().unwrap(), "--out", "/tmp/nope"]);
    assert!(!out.status.success());
    let err = stderr_text(&out);
    assert!(
        err.contains("config kind is `density`") && err.contains("`simulate`"),
        "stderr: {err}"
    );
}

#[test]
fn malformed_json_fails_without_creating_the_output_directory() {
    let work = TempDir::new().unwrap();
    let config = write_config(work.path(), "broken.json", "{\"schema_version\": 1,");
    let out_dir = work.path().join("out");
    let out = run(&[
        "density",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr_text(&out).starts_with("error:"));
    assert!(!out_dir.exists());
}

#[test]
fn missing_config_file_is_reported() {
    let out = run(&["density", "--config", "/definitely/not/here.json", "--out", "/tmp/nope"]);
    assert!(!out.status.success());
    assert!(stderr_text(&out).contains("cannot read"));
}

#[test]
fn invalid_parameters_fail_after_parsing_and_write_nothing() {
    let work = TempDir::new().unwrap();
    // kappa <= 1/2 has no normalizable density, so the run itself must fail
    let config = write_config(
        work.path(),
        "bad.json",
        r#"{"schema_version": 1, "kind": "density",
            "params": {"kappa": 0.4, "sigma_g": 1.0, "sigma_h": 1.0,
                       "grid": {"lo": -1.0, "hi": 1.0, "points": 11}}}"#,
    );
    let out_dir = work.path().join("out");
    let out = run(&[
        "density",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr_text(&out).starts_with("error:"));
    let leftovers = std::fs::read_dir(&out_dir)
        .map(|rd| rd.count())
        .unwrap_or(0);
    assert_eq!(leftovers, 0, "failed run left partial outputs");
}

#[test]
fn seed_flag_overrides_the_config_and_lands_in_the_manifest() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "fit.json",
        r#"{"schema_version": 1, "kind": "fit",
            "params": {"source": {"stationary": {
                "kappa": 2.0, "sigma_g": 1.0, "sigma_h": 1.0, "n": 2000}},
                "bins": 30}}"#,
    );
    let out_dir = work.path().join("out");
    let out = run(&[
        "fit",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "42",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_text(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["master_seed"], 42);
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["kind"], "fit");
}

#[test]
fn threads_flag_does_not_change_a_run_in_any_byte() {
    let work = TempDir::new().unwrap();
    let config = write_config(
        work.path(),
        "mc.json",
        r#"{"schema_version": 1, "kind": "escape-mc", "master_seed": 17,
            "params": {
              "well": {"min_a": 0.0, "curvature_a": 1.0, "curvature_b_abs": 1.0, "barrier": 1.0},
              "sigma_g": 4.0, "sigma_h": 13.333333333333334, "eta": 0.025,
              "mode": "POWER_LAW", "trials": 80, "max_steps": 400000,
              "emit_times": true}}"#,
    );
    let mut dirs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = work.path().join(format!("t{threads}"));
        let out = run(&[
            "escape-mc",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(out.status.success(), "stderr: {}", stderr_text(&out));
        dirs.push(out_dir);
    }
    for name in ["manifest.json", "escape_mc.json", "passage_times.csv"] {
        let a = std::fs::read(dirs[0].join(name)).unwrap();
        let b = std::fs::read(dirs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between thread counts");
    }
}

#[test]
fn censoring_warnings_go_to_stderr_not_stdout() {
    let work = TempDir::new().unwrap();
    // max_steps far too small: most trials are censored, which must warn
    let config = write_config(
        work.path(),
        "mc.json",
        r#"{"schema_version": 1, "kind": "escape-mc", "master_seed": 3,
            "params": {
              "well": {"min_a": 0.0, "curvature_a": 1.0, "curvature_b_abs": 1.0, "barrier": 1.0},
              "sigma_g": 4.0, "sigma_h": 13.333333333333334, "eta": 0.025,
              "mode": "POWER_LAW", "trials": 20, "max_steps": 100}}"#,
    );
    let out_dir = work.path().join("out");
    let out = run(&[
        "escape-mc",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stderr_text(&out).contains("warning:"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(!stdout.contains("warning:"), "warnings belong on stderr");
}
