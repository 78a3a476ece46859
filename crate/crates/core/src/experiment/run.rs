//! Scenario execution. Trials run in parallel and are gathered in index
//! order, so results never depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Aggregate, ExperimentConfig, Scenario, SweepParameter};
use crate::adc::{simulate, simulate_reference, ChannelParams, MismatchSpread};
use crate::calibrate::{calibrate_with, calibration_transient, Stages};
use crate::error::{Error, Result};
use crate::identify::{estimate_all_with, IdentifyOptions, MismatchEstimate};
use crate::rng::trial_seed;
use crate::spectrum::{
    analyze_with, label_spurs, predict_spurs, AnalysisOptions, SpectrumReport, SpurLabel,
    SpurPrediction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Spectrum,
    Identify,
    Calibrate(Stages),
}

/// Everything measured in one simulated record.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: u64,
    pub channels: Vec<ChannelParams>,
    pub raw: SpectrumReport,
    pub estimate: Option<MismatchEstimate>,
    pub compensated: Option<SpectrumReport>,
    pub saturations: usize,
}

/// A trial dropped because an estimator failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedTrial {
    pub sigma: Option<f64>,
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub sigma: f64,
    pub aggregate_sinad_db_uncompensated: f64,
    pub aggregate_sinad_db_compensated: f64,
    pub trials_used: usize,
    pub trials_excluded: usize,
}

/// Result of a full scenario run, before formatting.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    /// Representative record: the single run, or the first usable trial of
    /// the first sweep value.
    pub primary: TrialOutcome,
    pub prediction: Option<SpurPrediction>,
    pub sweep: Option<Vec<SweepPoint>>,
    pub excluded: Vec<ExcludedTrial>,
}

/// Frames added on each side of the analysed window so the interpolator's
/// zero-padding transient falls outside it.
pub fn guard_frames(cfg: &ExperimentConfig) -> usize {
    calibration_transient(cfg.calibration.taps).div_ceil(cfg.tiadc.m_channels)
}

fn analysis_options(cfg: &ExperimentConfig) -> AnalysisOptions {
    AnalysisOptions {
        window: cfg.analysis.window.into(),
        carrier_hint: cfg.signal.tones.first().map(|t| t.frequency_hz),
        spur_threshold_db: cfg.analysis.spur_threshold_db,
        carrier_span: None,
    }
}

/// Spectrum of `x` with spurs labelled against the interleaving pattern.
pub fn analyze_record(cfg: &ExperimentConfig, x: &[f64]) -> Result<SpectrumReport> {
    let fs = cfg.tiadc.sample_rate_hz;
    let report = analyze_with(x, fs, &analysis_options(cfg))?;
    Ok(
        match predict_spurs(cfg.tiadc.m_channels, report.carrier_freq_hz, fs) {
            Ok(pred) => label_spurs(&report, &pred, cfg.analysis.spur_tolerance_bins),
            Err(_) => report,
        },
    )
}

fn run_trial(
    cfg: &ExperimentConfig,
    spread: &MismatchSpread,
    seed: u64,
    mode: Mode,
) -> Result<TrialOutcome> {
    let adc = cfg.adc_config(spread, seed)?;
    let signal = cfg.signal_spec()?;
    let m = cfg.tiadc.m_channels;
    let guard = match mode {
        Mode::Calibrate(_) => guard_frames(cfg),
        _ => 0,
    };
    let frames = cfg.k_frames + 2 * guard;
    let window = guard * m..guard * m + cfg.record_len();

    let out = simulate(&adc, &signal, frames)?;
    let raw_stream = out.interleaved();
    let raw = analyze_record(cfg, &raw_stream[window.clone()])?;

    let estimate = match mode {
        Mode::Spectrum => None,
        _ => {
            let opts = IdentifyOptions {
                difference_mode: cfg.calibration.difference_mode.into(),
            };
            let reference_for = |ch| simulate_reference(&adc, &signal, frames, ch);
            Some(estimate_all_with(&out, &adc, reference_for, &opts)?)
        }
    };
    let compensated = match (mode, &estimate) {
        (Mode::Calibrate(stages), Some(est)) => {
            let fixed = calibrate_with(&out, est, cfg.calibration.taps, stages)?;
            Some(analyze_record(cfg, &fixed.samples[window])?)
        }
        _ => None,
    };
    Ok(TrialOutcome {
        seed,
        saturations: out.total_saturations(),
        channels: adc.channels,
        raw,
        estimate,
        compensated,
    })
}

fn aggregate(values: &[f64], how: Aggregate) -> f64 {
    match how {
        Aggregate::Worst => values.iter().copied().fold(f64::INFINITY, f64::min),
        Aggregate::Average => values.iter().sum::<f64>() / values.len() as f64,
    }
}

/// Runs the configured scenario.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunResult> {
    execute_in_order(cfg, None)
}

/// Like [`execute`], with sweep trials launched in the order given by a
/// permutation of `0..values * trials`. Used to check order independence.
pub fn execute_in_order(cfg: &ExperimentConfig, order: Option<&[usize]>) -> Result<RunResult> {
    let spread = cfg.spread();
    let prediction = cfg.signal.tones.first().and_then(|t| {
        predict_spurs(
            cfg.tiadc.m_channels,
            t.frequency_hz,
            cfg.tiadc.sample_rate_hz,
        )
        .ok()
    });
    let single = |mode| run_trial(cfg, &spread, trial_seed(cfg.master_seed, 0), mode);
    let primary = match cfg.scenario {
        Scenario::Spectrum | Scenario::BandwidthDemo => single(Mode::Spectrum)?,
        Scenario::Identify => single(Mode::Identify)?,
        Scenario::Calibrate => single(Mode::Calibrate(Stages::ALL))?,
        Scenario::Sweep => return execute_sweep(cfg, spread, prediction, order),
    };
    Ok(RunResult {
        config: cfg.clone(),
        primary,
        prediction,
        sweep: None,
        excluded: Vec::new(),
    })
}

fn execute_sweep(
    cfg: &ExperimentConfig,
    base: MismatchSpread,
    prediction: Option<SpurPrediction>,
    order: Option<&[usize]>,
) -> Result<RunResult> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("SWEEP needs a sweep section".into()))?;
    let stages = sweep
        .compensation
        .unwrap_or(super::config::Compensation::Full)
        .stages();
    let trials = sweep.trials;
    let total = sweep.values.len() * trials;
    let order: Vec<usize> = match order {
        Some(o) => {
            let mut sorted = o.to_vec();
            sorted.sort_unstable();
            if sorted != (0..total).collect::<Vec<_>>() {
                return Err(Error::Input(format!("trial order must permute 0..{total}")));
            }
            o.to_vec()
        }
        None => (0..total).collect(),
    };

    let spread_for = |sigma: f64| {
        let mut s = base;
        match sweep.parameter {
            SweepParameter::OffsetStd => s.offset_std = sigma,
            SweepParameter::GainStd => s.gain_std = sigma,
            SweepParameter::TimingStd => s.timing_std = sigma * cfg.sample_period(),
        }
        s
    };
    let launched: Vec<(usize, Result<TrialOutcome>)> = order
        .par_iter()
        .map(|&idx| {
            let (v, i) = (idx / trials, idx % trials);
            let seed = trial_seed(cfg.master_seed, i as u64);
            (
                idx,
                run_trial(
                    cfg,
                    &spread_for(sweep.values[v]),
                    seed,
                    Mode::Calibrate(stages),
                ),
            )
        })
        .collect();
    let mut slots: Vec<Option<Result<TrialOutcome>>> = (0..total).map(|_| None).collect();
    for (idx, r) in launched {
        slots[idx] = Some(r);
    }

    let mut excluded = Vec::new();
    let mut points = Vec::with_capacity(sweep.values.len());
    let mut primary = None;
    let mut slots = slots.into_iter().map(|s| s.expect("every trial ran"));
    for &sigma in &sweep.values {
        let (mut unc, mut comp) = (Vec::new(), Vec::new());
        for i in 0..trials {
            match slots.next().expect("trial count") {
                Ok(t) => {
                    unc.push(t.raw.sinad_db);
                    comp.push(
                        t.compensated
                            .as_ref()
                            .map_or(t.raw.sinad_db, |c| c.sinad_db),
                    );
                    primary.get_or_insert(t);
                }
                Err(e) if e.is_estimator_failure() => excluded.push(ExcludedTrial {
                    sigma: Some(sigma),
                    trial: i,
                    error: e.to_string(),
                }),
                Err(e) => return Err(e),
            }
        }
        if unc.is_empty() {
            return Err(Error::DegenerateSignal(format!(
                "every trial failed identification at sigma = {sigma}"
            )));
        }
        points.push(SweepPoint {
            sigma,
            aggregate_sinad_db_uncompensated: aggregate(&unc, sweep.aggregate),
            aggregate_sinad_db_compensated: aggregate(&comp, sweep.aggregate),
            trials_used: unc.len(),
            trials_excluded: trials - unc.len(),
        });
    }
    Ok(RunResult {
        config: cfg.clone(),
        primary: primary.expect("at least one usable trial"),
        prediction,
        sweep: Some(points),
        excluded,
    })
}

impl RunResult {
    /// Spectrum written to disk: the corrected one when correction ran.
    pub fn output_spectrum(&self) -> &SpectrumReport {
        self.primary
            .compensated
            .as_ref()
            .unwrap_or(&self.primary.raw)
    }

    pub fn image_fraction(&self) -> f64 {
        self.output_spectrum()
            .spur_fraction(SpurLabel::SignalImageSpur)
    }
}
