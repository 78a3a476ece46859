use tiadc::experiment::config::{Aggregate, Compensation};
use tiadc::experiment::{self, render, Scenario};

fn sweep_config(text: &str) -> experiment::ExperimentConfig {
    experiment::validate(text).unwrap()
}

#[test]
fn estimator_failures_become_exclusions() {
    let cfg = sweep_config(
        r#"{"scenario": "SWEEP", "k_frames": 256, "tiadc": {"quantizer": {"bits": 10}},
            "sweep": {"parameter": "TIMING_STD", "values": [0.2, 0.45], "trials": 20}}"#,
    );
    let run = experiment::execute(&cfg).unwrap();
    let points = run.sweep.as_ref().unwrap();
    let excluded: usize = points.iter().map(|p| p.trials_excluded).sum();
    assert!(excluded > 0);
    assert_eq!(excluded, run.excluded.len());
    for p in points {
        assert_eq!(p.trials_used + p.trials_excluded, 20);
    }
    for e in &run.excluded {
        assert!(e.error.contains("channel"), "{}", e.error);
        assert!(e.trial < 20);
    }
    let report: serde_json::Value = serde_json::from_str(&render(&run).report_json).unwrap();
    assert_eq!(
        report["excluded_trials"].as_array().unwrap().len(),
        excluded
    );
}

#[test]
fn worst_case_never_exceeds_average() {
    let text = |agg: &str| {
        format!(
            r#"{{"scenario": "SWEEP", "k_frames": 256, "tiadc": {{"quantizer": {{"bits": 10}},
                "mismatch": {{"timing_std_rel": 0.005}}}},
                "sweep": {{"parameter": "GAIN_STD", "values": [0.001, 0.01], "trials": 10, "aggregate": "{agg}"}}}}"#
        )
    };
    let worst = experiment::execute(&sweep_config(&text("WORST")))
        .unwrap()
        .sweep
        .unwrap();
    let mean = experiment::execute(&sweep_config(&text("AVERAGE")))
        .unwrap()
        .sweep
        .unwrap();
    for (w, m) in worst.iter().zip(&mean) {
        assert!(w.aggregate_sinad_db_uncompensated <= m.aggregate_sinad_db_uncompensated);
        assert!(w.aggregate_sinad_db_compensated <= m.aggregate_sinad_db_compensated);
    }
}

#[test]
fn uncompensated_sinad_falls_with_spread() {
    let cfg = sweep_config(
        r#"{"scenario": "SWEEP", "k_frames": 256, "tiadc": {"quantizer": {"bits": 12}},
            "sweep": {"parameter": "OFFSET_STD", "values": [0.001, 0.004, 0.016], "trials": 8}}"#,
    );
    assert_eq!(
        cfg.sweep.as_ref().unwrap().compensation,
        Some(Compensation::Offset)
    );
    assert_eq!(cfg.sweep.as_ref().unwrap().aggregate, Aggregate::Worst);
    let points = experiment::execute(&cfg).unwrap().sweep.unwrap();
    for w in points.windows(2) {
        assert!(w[1].aggregate_sinad_db_uncompensated < w[0].aggregate_sinad_db_uncompensated);
    }
    // offset correction recovers the converter regardless of the spread
    let spread = points.iter().map(|p| p.aggregate_sinad_db_compensated);
    let (lo, hi) = spread.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    assert!(hi - lo < 1.0, "{points:?}");
}

#[test]
fn mismatched_spectrum_shows_predicted_spurs() {
    let cfg = sweep_config(
        r#"{"k_frames": 1024, "tiadc": {"quantizer": {"bits": 10},
            "mismatch": {"offset_std_v": 0.01, "gain_std": 0.01, "timing_std_rel": 0.005}}}"#,
    );
    assert_eq!(cfg.scenario, Scenario::Spectrum);
    let run = experiment::execute(&cfg).unwrap();
    let spectrum = run.output_spectrum();
    let pred = run.prediction.as_ref().unwrap();
    for f in pred.offset.iter().chain(&pred.image) {
        let bin = spectrum.bin_of(*f);
        assert!(
            spectrum.spurs.iter().any(|s| s.bin == bin),
            "no spur at {f} Hz"
        );
    }
}

#[test]
fn explicit_channels_are_reported_verbatim() {
    let cfg = sweep_config(
        r#"{"scenario": "IDENTIFY", "k_frames": 4096, "tiadc": {"quantizer": {"bits": 14}, "channels": [
            {}, {"gain": 1.02}, {"offset_v": -0.03}, {"timing_skew_rel": 0.01}]}}"#,
    );
    let run = experiment::execute(&cfg).unwrap();
    let report: serde_json::Value = serde_json::from_str(&render(&run).report_json).unwrap();
    let ch = &report["channels"];
    assert_eq!(ch[1]["truth"]["gain"], 1.02);
    assert_eq!(ch[2]["truth"]["offset_v"], -0.03);
    assert!((ch[1]["estimate"]["gain"].as_f64().unwrap() - 1.02).abs() < 1e-3);
    assert!((ch[2]["estimate"]["offset_v"].as_f64().unwrap() + 0.03).abs() < 1e-3);
    assert!((ch[3]["estimate"]["timing_skew_rel"].as_f64().unwrap() - 0.01).abs() < 2e-3);
}

#[test]
fn schema_lists_every_section() {
    let schema: serde_json::Value = serde_json::from_str(&experiment::schema()).unwrap();
    let props = schema["properties"].as_object().unwrap();
    for key in [
        "scenario",
        "master_seed",
        "k_frames",
        "output_dir",
        "tiadc",
        "signal",
        "sweep",
        "calibration",
        "analysis",
    ] {
        assert!(props.contains_key(key), "{key}");
    }
}
