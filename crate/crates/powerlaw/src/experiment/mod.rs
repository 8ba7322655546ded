//! Config-driven experiment orchestration.
//!
//! A JSON config selects one experiment kind; [`run_experiment`] validates
//! it, computes everything in memory, and atomically writes the artifacts
//! plus a `manifest.json` into the output directory. The manifest is the
//! fully resolved config (defaults filled, seeds pinned) and can be re-fed
//! to reproduce the run byte for byte, regardless of thread count.

mod config;
mod emit;
mod run;

pub use config::{
    parse_config, BoundParams, ChainSource, DensityParams, DoubleWellSpec, EscapeAnalyticParams,
    EscapeMcParams, ExperimentConfig, FitParams, FitSource, GridSpec, Kind, LandscapeSpec, Params,
    QuadraticSpec, RegionSpec, ResolvedConfig, ScalarNoiseSpec, StationarySource,
    SuccessRateParams, ToySpec, SCHEMA_VERSION,
};
pub use emit::{commit_artifacts, csv_document, fmt_float, json_document, Artifact};
pub use run::{run_experiment, Overrides, RunReport};

#[cfg(test)]
mod tests {
    use super::*;

    fn run_json(json: &str, dir: &std::path::Path) -> crate::Result<RunReport> {
        run_experiment(
            parse_config(json)?,
            &Overrides {
                out: Some(dir.to_path_buf()),
                seed: None,
                threads: None,
            },
        )
    }

    #[test]
    fn bound_run_writes_manifest_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let json = r#"{
            "schema_version": 1, "kind": "bound", "master_seed": 1,
            "params": {
                "hessian": [[1.0]], "sigma_g_mat": [[1.0]], "eta": 2.0,
                "kappa": 5.0, "n_samples": 10, "delta": 0.1, "empirical_risk": 0.0
            }
        }"#;
        let report = run_json(json, dir.path()).unwrap();
        assert_eq!(report.files.len(), 2);
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("bound.json")).unwrap())
                .unwrap();
        assert_eq!(summary["kl_upper_bound"], 0.0);
        let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        // the manifest is itself a valid config
        let reparsed = parse_config(&manifest).unwrap();
        assert_eq!(reparsed.master_seed, Some(1));
    }

    #[test]
    fn manifest_round_trip_is_byte_identical() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let json = r#"{
            "schema_version": 1, "kind": "density", "master_seed": 3,
            "params": {
                "sigma_g": 1.0, "sigma_h": 0.5, "kappa": 2.0, "center": 0.1,
                "grid": {"lo": -4.0, "hi": 4.0, "points": 33}
            }
        }"#;
        run_json(json, dir1.path()).unwrap();
        let manifest = std::fs::read_to_string(dir1.path().join("manifest.json")).unwrap();
        run_json(&manifest, dir2.path()).unwrap();
        for name in ["density.csv", "density.json", "manifest.json"] {
            let a = std::fs::read(dir1.path().join(name)).unwrap();
            let b = std::fs::read(dir2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs after manifest round trip");
        }
    }

    #[test]
    fn thread_count_does_not_change_output_bytes() {
        let json = r#"{
            "schema_version": 1, "kind": "escape-mc", "master_seed": 11,
            "params": {
                "well": {"min_a": 0.0, "curvature_a": 1.0, "curvature_b_abs": 1.0, "barrier": 0.5},
                "sigma_g": 4.0, "sigma_h": 0.0, "eta": 0.1,
                "mode": "LANGEVIN", "trials": 60, "max_steps": 200000,
                "emit_times": true
            }
        }"#;
        let mut bytes = Vec::new();
        for threads in [1usize, 4] {
            let dir = tempfile::tempdir().unwrap();
            let report = run_experiment(
                parse_config(json).unwrap(),
                &Overrides {
                    out: Some(dir.path().to_path_buf()),
                    seed: None,
                    threads: Some(threads),
                },
            )
            .unwrap();
            let mut all = Vec::new();
            let mut names: Vec<_> = report
                .files
                .iter()
                .map(|p| p.file_name().unwrap().to_owned())
                .collect();
            names.sort();
            for name in names {
                all.extend_from_slice(&std::fs::read(dir.path().join(name)).unwrap());
            }
            bytes.push(all);
        }
        assert_eq!(bytes[0], bytes[1], "outputs depend on thread count");
    }

    #[test]
    fn failed_run_leaves_no_partial_outputs() {
        let dir = tempfile::tempdir().unwrap();
        // kappa <= 1/2 is not normalizable, so the run fails after parsing
        let json = r#"{
            "schema_version": 1, "kind": "density", "master_seed": 3,
            "params": {
                "sigma_g": 1.0, "sigma_h": 0.5, "kappa": 0.4,
                "grid": {"lo": -4.0, "hi": 4.0, "points": 33}
            }
        }"#;
        assert!(run_json(json, dir.path()).is_err());
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .map(|it| it.map(|e| e.unwrap().path()).collect())
            .unwrap_or_default();
        assert!(leftovers.is_empty(), "partial outputs: {leftovers:?}");
    }

    #[test]
    fn missing_output_directory_is_an_error() {
        let json = r#"{
            "schema_version": 1, "kind": "bound", "master_seed": 1,
            "params": {
                "hessian": [[1.0]], "sigma_g_mat": [[1.0]], "eta": 2.0,
                "kappa": 5.0, "n_samples": 10, "delta": 0.1, "empirical_risk": 0.0
            }
        }"#;
        let err = run_experiment(parse_config(json).unwrap(), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("output directory"), "{err}");
    }

    #[test]
    fn generated_seed_is_recorded_in_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let json = r#"{
            "schema_version": 1, "kind": "fit",
            "params": {
                "source": {"stationary": {"kappa": 2.0, "sigma_g": 1.0, "sigma_h": 1.0, "n": 500}},
                "bins": 20
            }
        }"#;
        run_json(json, dir.path()).unwrap();
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert!(manifest["master_seed"].is_u64());
    }

    #[test]
    fn success_rate_records_matched_lambda2() {
        let dir = tempfile::tempdir().unwrap();
        let json = r#"{
            "schema_version": 1, "kind": "success-rate", "master_seed": 5,
            "params": {
                "toy": {"n": 120, "data_std": 0.02, "data_seed": 9, "scale": 1.0},
                "eta": 0.025, "steps": 40, "runs": 10,
                "lambda1_values": [0.0, 32.0],
                "include_sgd": true, "batch_size": 4, "match_draws": 200
            }
        }"#;
        run_json(json, dir.path()).unwrap();
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        let lambda2 = manifest["params"]["lambda2"].as_f64().unwrap();
        assert!(lambda2 > 0.0);
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("success_rate.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(summary["lambda2"].as_f64().unwrap(), lambda2);
        assert!(summary["sgd_rate"].is_f64());
        let csv = std::fs::read_to_string(dir.path().join("success_rate.csv")).unwrap();
        assert!(csv.starts_with("dynamic,lambda1,rate\n"));
        assert!(csv.contains("sgd,,"));
    }

    #[test]
    fn simulate_emits_a_trajectory_with_correct_steps() {
        let dir = tempfile::tempdir().unwrap();
        let json = r#"{
            "schema_version": 1, "kind": "simulate", "master_seed": 8,
            "params": {
                "landscape": {"quadratic": {"center": [0.0], "curvatures": [1.0]}},
                "mode": "POWER_LAW", "eta": 0.05, "steps": 100, "record_every": 10,
                "w0": [0.3],
                "noise": {"sigma_g": 1.0, "sigma_h": 0.5}
            }
        }"#;
        run_json(json, dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,w0,loss");
        assert_eq!(lines.len(), 12); // header + 11 records
        assert!(lines[1].starts_with("0,0.3,"));
        assert!(lines[11].starts_with("100,"));
        // resolved manifest carries the noise center from the landscape
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["params"]["noise"]["center"], 0.0);
        assert_eq!(manifest["params"]["noise"]["curvature"], 1.0);
    }

    #[test]
    fn escape_analytic_accepts_an_empty_grid() {
        let dir = tempfile::tempdir().unwrap();
        let json = r#"{
            "schema_version": 1, "kind": "escape-analytic", "master_seed": 1,
            "params": {
                "eta": 0.1, "sigma_g": 1.0, "kappa": 2.0, "alpha": 1.0,
                "h_a": [], "h_b_abs": [1.0], "delta_l": [1.0]
            }
        }"#;
        run_json(json, dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("escape_analytic.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1, "expected header-only CSV");
    }

    #[test]
    fn noise_scan_resolves_its_center() {
        let dir = tempfile::tempdir().unwrap();
        let json = r#"{
            "schema_version": 1, "kind": "noise-scan", "master_seed": 2,
            "params": {
                "toy": {"n": 150, "data_std": 0.02, "data_seed": 4, "scale": 1.0},
                "half_width": 0.05, "points": 5, "batch_size": 4, "draws": 80
            }
        }"#;
        run_json(json, dir.path()).unwrap();
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        let center = manifest["params"]["center"].as_array().unwrap();
        assert!((center[0].as_f64().unwrap() - 1.0).abs() < 0.1);
        let points = std::fs::read_to_string(dir.path().join("scan_points.csv")).unwrap();
        assert_eq!(points.lines().count(), 6);
        assert!(dir.path().join("scan_curve.csv").exists());
    }
}
