//! CSV and JSON artifacts, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, Scenario};
use super::run::{ExcludedTrial, RunResult, SweepPoint};
use crate::adc::ChannelParams;
use crate::spectrum::{SpectrumReport, Spur, SpurLabel, SpurPrediction};

pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Fixed-point decimal with 9 significant digits.
pub fn fmt_sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let x = if x == 0.0 { 0.0 } else { x };
    if x == 0.0 {
        return "0.00000000".into();
    }
    // exponent after rounding to 9 significant digits
    let sci = format!("{x:.8e}");
    let exp: i32 = sci
        .split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (8 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub sinad_db: f64,
    pub sfdr_db: f64,
    pub enob_bits: f64,
    pub noise_floor_dbc: f64,
    pub carrier_freq_hz: f64,
    pub offset_spur_fraction: f64,
    pub image_spur_fraction: f64,
}

impl From<&SpectrumReport> for Metrics {
    fn from(r: &SpectrumReport) -> Self {
        Self {
            sinad_db: r.sinad_db,
            sfdr_db: r.sfdr_db,
            enob_bits: r.enob_bits,
            noise_floor_dbc: r.noise_floor_dbc,
            carrier_freq_hz: r.carrier_freq_hz,
            offset_spur_fraction: r.spur_fraction(SpurLabel::OffsetSpur),
            image_spur_fraction: r.spur_fraction(SpurLabel::SignalImageSpur),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelTruth {
    pub offset_v: f64,
    pub gain: f64,
    pub timing_skew_rel: f64,
    pub cutoff_hz: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelEstimate {
    pub offset_v: f64,
    pub gain: f64,
    /// Estimated skew relative to the reference, in units of T_s.
    pub timing_skew_rel: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    pub channel: usize,
    pub truth: ChannelTruth,
    pub estimate: Option<ChannelEstimate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub scenario: Scenario,
    pub seed: u64,
    pub trial_seed: u64,
    pub metrics: Metrics,
    /// Figures before correction, present when correction ran.
    pub uncompensated_metrics: Option<Metrics>,
    pub saturations: usize,
    pub spurs: &'a [Spur],
    pub predicted_spurs: Option<&'a SpurPrediction>,
    pub channels: Vec<ChannelReport>,
    pub sweep: Option<&'a [SweepPoint]>,
    pub excluded_trials: &'a [ExcludedTrial],
    pub config: &'a ExperimentConfig,
}

fn truth(p: &ChannelParams, sample_period: f64) -> ChannelTruth {
    ChannelTruth {
        offset_v: p.offset,
        gain: p.gain,
        timing_skew_rel: p.timing_skew / sample_period,
        cutoff_hz: p.filter.map(|f| f.cutoff()),
    }
}

/// The rendered contents of every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub spectrum_csv: String,
    pub report_json: String,
    pub sweep_csv: Option<String>,
}

pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut s = String::from("freq_hz,power_dbc\n");
    for (f, p) in report.bin_freqs.iter().zip(&report.power_dbc) {
        s.push_str(&fmt_sig9(*f));
        s.push(',');
        s.push_str(&fmt_sig9(*p));
        s.push('\n');
    }
    s
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s =
        String::from("sigma,aggregate_sinad_db_uncompensated,aggregate_sinad_db_compensated\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_sig9(p.sigma),
            fmt_sig9(p.aggregate_sinad_db_uncompensated),
            fmt_sig9(p.aggregate_sinad_db_compensated)
        ));
    }
    s
}

pub fn render(run: &RunResult) -> Artifacts {
    let cfg = &run.config;
    let primary = &run.primary;
    let ts = cfg.sample_period();
    let channels = primary
        .channels
        .iter()
        .enumerate()
        .map(|(m, p)| ChannelReport {
            channel: m,
            truth: truth(p, ts),
            estimate: primary.estimate.as_ref().map(|e| ChannelEstimate {
                offset_v: e.offsets_v[m],
                gain: e.gains[m],
                timing_skew_rel: e.rel_timing[m],
            }),
        })
        .collect();
    let shown = run.output_spectrum();
    let report = Report {
        scenario: cfg.scenario,
        seed: cfg.master_seed,
        trial_seed: primary.seed,
        metrics: shown.into(),
        uncompensated_metrics: primary.compensated.as_ref().map(|_| (&primary.raw).into()),
        saturations: primary.saturations,
        spurs: &shown.spurs,
        predicted_spurs: run.prediction.as_ref(),
        channels,
        sweep: run.sweep.as_deref(),
        excluded_trials: &run.excluded,
        config: cfg,
    };
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    Artifacts {
        spectrum_csv: spectrum_csv(shown),
        report_json,
        sweep_csv: run.sweep.as_deref().map(sweep_csv),
    }
}

/// Writes `contents` to a temporary file beside `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

impl Artifacts {
    pub fn write_to(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = vec![
            (dir.join(SPECTRUM_FILE), &self.spectrum_csv),
            (dir.join(REPORT_FILE), &self.report_json),
        ];
        if let Some(s) = &self.sweep_csv {
            files.push((dir.join(SWEEP_FILE), s));
        }
        for (path, contents) in &files {
            write_atomic(path, contents)?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}
