use std::path::Path;
use std::process::{Command, Output};

fn tiadc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiadc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{
  "k_frames": 256,
  "tiadc": {"quantizer": {"bits": 10}, "mismatch": {"offset_std_v": 0.01, "gain_std": 0.01, "timing_std_rel": 0.005}},
  "signal": {"tones": [{"amplitude_v": 0.9, "frequency_hz": 98632.8125}]},
  "sweep": {"parameter": "TIMING_STD", "values": [0.001, 0.01], "trials": 4}
}"#;

#[test]
fn validate_prints_normalized_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiadc(&["validate"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["tiadc"]["m_channels"], 4);
    assert_eq!(value["calibration"]["taps"], 32);

    // the printed config validates to itself
    let cfg = write_config(dir.path(), &text);
    let again = tiadc(&["validate", "--config", &cfg], dir.path());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"tiadc": {"m_channels": 0}, "k_frames": 1}"#);
    for verb in ["validate", "simulate", "sweep"] {
        let out = tiadc(&[verb, "--config", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(1), "{verb}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains("tiadc.m_channels"), "{err}");
        assert!(err.contains("k_frames"), "{err}");
    }
    let out = tiadc(&["simulate", "--config", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let bad = write_config(dir.path(), "{\"k_frames\": }");
    let out = tiadc(&["simulate", "--config", &bad], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 1"));
    let out = tiadc(&["simulate", "--format", "xml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // a clipped, constant record gives the timing estimator nothing to work with
    let cfg = write_config(
        dir.path(),
        r#"{"k_frames": 256, "signal": {"dc_v": 5.0, "tones": [{"amplitude_v": 0.1, "frequency_hz": 1000.0}]}}"#,
    );
    let out = tiadc(
        &["identify", "--config", &cfg, "--out-dir", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8(out.stderr).unwrap().is_empty());

    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = tiadc(&["simulate", "--out-dir", "blocker"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_spectrum_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = tiadc(
        &[
            "simulate",
            "--config",
            &cfg,
            "--out-dir",
            "run",
            "--seed",
            "9",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("run/spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("freq_hz,power_dbc"));
    assert!(lines.next().unwrap().starts_with("0.00000000,"));
    assert_eq!(csv.lines().count(), 1 + 512 + 1);
    assert_eq!(csv.lines().nth(1 + 101).unwrap(), "98632.8125,0.00000000");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["scenario"], "SPECTRUM");
    assert_eq!(report["seed"], 9);
    assert_eq!(report["config"]["master_seed"], 9);
    assert_eq!(report["channels"].as_array().unwrap().len(), 4);
    assert!(report["channels"][0]["estimate"].is_null());
    assert!(report["metrics"]["sinad_db"].as_f64().unwrap() > 20.0);
    assert!(!dir.path().join("run/sweep.csv").exists());
}

#[test]
fn calibrate_reports_estimates_against_truth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = tiadc(
        &[
            "calibrate",
            "--config",
            &cfg,
            "--out-dir",
            "cal",
            "--format",
            "json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        stdout,
        std::fs::read_to_string(dir.path().join("cal/report.json")).unwrap()
    );
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["scenario"], "CALIBRATE");
    let before = report["uncompensated_metrics"]["sinad_db"]
        .as_f64()
        .unwrap();
    let after = report["metrics"]["sinad_db"].as_f64().unwrap();
    assert!(after > before + 10.0, "{before} -> {after}");
    for ch in report["channels"].as_array().unwrap() {
        let truth = ch["truth"]["gain"].as_f64().unwrap();
        let est = ch["estimate"]["gain"].as_f64().unwrap();
        assert!((truth - est).abs() < 5e-3);
    }
}

#[test]
fn sweep_csv_and_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let read_all = || -> Vec<Vec<u8>> {
        ["spectrum.csv", "report.json", "sweep.csv"]
            .iter()
            .map(|name| std::fs::read(dir.path().join("a").join(name)).unwrap())
            .collect()
    };
    let a = tiadc(
        &[
            "sweep",
            "--config",
            &cfg,
            "--out-dir",
            "a",
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert_eq!(a.status.code(), Some(0));
    let first = read_all();
    let b = tiadc(&["sweep", "--config", &cfg, "--out-dir", "a"], dir.path());
    assert_eq!(b.status.code(), Some(0));
    assert!(first == read_all(), "rerun changed the artifacts");
    let sweep = std::fs::read_to_string(dir.path().join("a/sweep.csv")).unwrap();
    assert_eq!(String::from_utf8(a.stdout).unwrap(), sweep);
    let rows: Vec<&str> = sweep.lines().collect();
    assert_eq!(
        rows[0],
        "sigma,aggregate_sinad_db_uncompensated,aggregate_sinad_db_compensated"
    );
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0.00100000000,"));

    let c = tiadc(
        &["sweep", "--config", &cfg, "--out-dir", "c", "--seed", "2"],
        dir.path(),
    );
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(
        std::fs::read(dir.path().join("a/sweep.csv")).unwrap(),
        std::fs::read(dir.path().join("c/sweep.csv")).unwrap()
    );
}
