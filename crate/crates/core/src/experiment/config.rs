//! Experiment configuration: JSON schema, defaults, and validation.
//!
//! All time quantities in the file are fractions of the aggregate sample
//! period `T_s`; frequencies are in Hz and voltages in volts.

use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::adc::{ChannelParams, MismatchSpread, TiAdcConfig};
use crate::calibrate::{Stages, DEFAULT_TAPS, MIN_TAPS};
use crate::identify::DifferenceMode;
use crate::quantizer::QuantizerSpec;
use crate::signal::{FilterSpec, SignalSpec, Tone};
use crate::spectrum::Window;

pub const DEFAULT_SAMPLE_RATE: f64 = 1.0e6;
/// 101/1024 of the default sample rate.
pub const DEFAULT_TONE_HZ: f64 = 98_632.812_5;
pub const DEFAULT_TRIALS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scenario {
    #[default]
    Spectrum,
    Sweep,
    Identify,
    Calibrate,
    BandwidthDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepParameter {
    OffsetStd,
    GainStd,
    TimingStd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Aggregate {
    /// Minimum SINAD over trials.
    #[default]
    Worst,
    /// Mean SINAD in dB over trials.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Compensation {
    Offset,
    OffsetGain,
    Full,
}

impl Compensation {
    pub fn stages(self) -> Stages {
        match self {
            Compensation::Offset => Stages::OFFSET,
            Compensation::OffsetGain => Stages::OFFSET_GAIN,
            Compensation::Full => Stages::ALL,
        }
    }

    fn for_parameter(p: SweepParameter) -> Self {
        match p {
            SweepParameter::OffsetStd => Compensation::Offset,
            SweepParameter::GainStd => Compensation::OffsetGain,
            SweepParameter::TimingStd => Compensation::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct QuantizerSection {
    pub bits: u32,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for QuantizerSection {
    fn default() -> Self {
        Self {
            bits: 8,
            v_min: -1.0,
            v_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub offset_v: f64,
    pub gain: f64,
    pub timing_skew_rel: f64,
    /// Input filter -3 dB frequency; null for an ideal front end.
    pub cutoff_hz: Option<f64>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            offset_v: 0.0,
            gain: 1.0,
            timing_skew_rel: 0.0,
            cutoff_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct MismatchSection {
    pub offset_std_v: f64,
    pub gain_std: f64,
    pub timing_std_rel: f64,
    /// Relative spread of the input-filter cutoff; 0.1 for BANDWIDTH_DEMO.
    pub cutoff_std_rel: Option<f64>,
    /// Nominal input-filter cutoff; 5 f_s for BANDWIDTH_DEMO.
    pub nominal_cutoff_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct AdcSection {
    pub m_channels: usize,
    pub sample_rate_hz: f64,
    pub jitter_std_rel: f64,
    pub quantizer: QuantizerSection,
    /// Explicit per-channel parameters. Mutually exclusive with a non-zero
    /// `mismatch` spread.
    pub channels: Option<Vec<ChannelSection>>,
    pub reference: ChannelSection,
    pub reference_aligned_to: usize,
    pub mismatch: MismatchSection,
}

impl Default for AdcSection {
    fn default() -> Self {
        Self {
            m_channels: 4,
            sample_rate_hz: DEFAULT_SAMPLE_RATE,
            jitter_std_rel: 0.0,
            quantizer: QuantizerSection::default(),
            channels: None,
            reference: ChannelSection::default(),
            reference_aligned_to: 0,
            mismatch: MismatchSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ToneSection {
    pub amplitude_v: f64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SignalSection {
    pub dc_v: f64,
    pub tones: Vec<ToneSection>,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            dc_v: 0.0,
            tones: vec![ToneSection {
                amplitude_v: 0.9,
                frequency_hz: DEFAULT_TONE_HZ,
                phase_rad: 0.0,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    /// Standard deviations, strictly positive and ascending.
    pub values: Vec<f64>,
    pub trials: usize,
    pub aggregate: Aggregate,
    /// Corrections applied for the compensated curve; defaults by parameter
    /// (OFFSET_STD: OFFSET, GAIN_STD: OFFSET_GAIN, TIMING_STD: FULL).
    pub compensation: Option<Compensation>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::GainStd,
            values: vec![0.001, 0.002, 0.005, 0.01, 0.02],
            trials: DEFAULT_TRIALS,
            aggregate: Aggregate::Worst,
            compensation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    /// Interpolator half-length L (2L+1 taps).
    pub taps: usize,
    pub difference_mode: DifferenceModeSetting,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            taps: DEFAULT_TAPS,
            difference_mode: DifferenceModeSetting::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DifferenceModeSetting {
    #[default]
    Absolute,
    Signed,
}

impl From<DifferenceModeSetting> for DifferenceMode {
    fn from(value: DifferenceModeSetting) -> Self {
        match value {
            DifferenceModeSetting::Absolute => DifferenceMode::Absolute,
            DifferenceModeSetting::Signed => DifferenceMode::Signed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WindowSetting {
    #[default]
    Rectangular,
    Hann,
}

impl From<WindowSetting> for Window {
    fn from(value: WindowSetting) -> Self {
        match value {
            WindowSetting::Rectangular => Window::Rectangular,
            WindowSetting::Hann => Window::Hann,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub window: WindowSetting,
    pub spur_threshold_db: f64,
    pub spur_tolerance_bins: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            window: WindowSetting::Rectangular,
            spur_threshold_db: 15.0,
            spur_tolerance_bins: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub master_seed: u64,
    /// Frames per channel in the analysed record (record length M * k_frames,
    /// a power of two).
    pub k_frames: usize,
    pub output_dir: String,
    pub tiadc: AdcSection,
    pub signal: SignalSection,
    /// Required for SWEEP; filled with defaults there and null otherwise.
    pub sweep: Option<SweepSection>,
    pub calibration: CalibrationSection,
    pub analysis: AnalysisSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Spectrum,
            master_seed: 1,
            k_frames: 1024,
            output_dir: "out".into(),
            tiadc: AdcSection::default(),
            signal: SignalSection::default(),
            sweep: None,
            calibration: CalibrationSection::default(),
            analysis: AnalysisSection::default(),
        }
    }
}

/// One problem found in a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// Dotted path of the offending field; empty for document-level issues.
    pub path: String,
    /// 1-based location in the source text, when known.
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(line), Some(col)) = (self.line, self.column) {
            write!(f, "line {line}, column {col}: ")?;
        } else if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        let path = if self.path.is_empty() {
            "<root>"
        } else {
            &self.path
        };
        write!(f, "{path}: {}", self.message)
    }
}

/// Line of the first occurrence of `"key"` in `text`, 1-based.
fn locate_key(text: &str, path: &str) -> Option<usize> {
    let key = path.rsplit('.').next()?;
    let key = key.split('[').next()?;
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

/// Parses and validates configuration text, filling every default.
pub fn validate(text: &str) -> Result<ExperimentConfig, Vec<ConfigIssue>> {
    let text_or_empty = if text.trim().is_empty() { "{}" } else { text };
    let de = &mut serde_json::Deserializer::from_str(text_or_empty);
    let parsed: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        vec![ConfigIssue {
            path: if path == "." { String::new() } else { path },
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: inner.to_string(),
        }]
    })?;
    let normalized = normalize(parsed);
    let mut issues = check(&normalized);
    for issue in &mut issues {
        issue.line = locate_key(text, &issue.path);
    }
    if issues.is_empty() {
        Ok(normalized)
    } else {
        Err(issues)
    }
}

/// Re-targets a validated configuration at `scenario`, filling the defaults
/// that scenario needs.
pub fn with_scenario(
    mut cfg: ExperimentConfig,
    scenario: Scenario,
) -> Result<ExperimentConfig, Vec<ConfigIssue>> {
    if cfg.scenario == scenario {
        return Ok(cfg);
    }
    cfg.scenario = scenario;
    let cfg = normalize(cfg);
    let issues = check(&cfg);
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(issues)
    }
}

/// Fills scenario-dependent defaults.
pub fn normalize(mut cfg: ExperimentConfig) -> ExperimentConfig {
    let fs = cfg.tiadc.sample_rate_hz;
    let mismatch = &mut cfg.tiadc.mismatch;
    if cfg.scenario == Scenario::BandwidthDemo {
        mismatch.nominal_cutoff_hz.get_or_insert(5.0 * fs);
        mismatch.cutoff_std_rel.get_or_insert(0.1);
    } else {
        mismatch.cutoff_std_rel.get_or_insert(0.0);
    }
    if cfg.scenario == Scenario::Sweep {
        let sweep = cfg.sweep.get_or_insert_with(SweepSection::default);
        sweep
            .compensation
            .get_or_insert(Compensation::for_parameter(sweep.parameter));
    }
    cfg
}

fn check(cfg: &ExperimentConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    let mut err = |path: &str, message: String| {
        issues.push(ConfigIssue {
            path: path.to_string(),
            line: None,
            column: None,
            message,
        })
    };
    let adc = &cfg.tiadc;
    let fs = adc.sample_rate_hz;

    if adc.m_channels < 2 {
        err(
            "tiadc.m_channels",
            format!("must be >= 2, got {}", adc.m_channels),
        );
    }
    if !(fs > 0.0 && fs.is_finite()) {
        err("tiadc.sample_rate_hz", format!("must be > 0, got {fs}"));
    }
    if !(adc.jitter_std_rel >= 0.0 && adc.jitter_std_rel.is_finite()) {
        err(
            "tiadc.jitter_std_rel",
            format!("must be >= 0, got {}", adc.jitter_std_rel),
        );
    }
    if let Err(e) = QuantizerSpec::new(adc.quantizer.bits, adc.quantizer.v_min, adc.quantizer.v_max)
    {
        err("tiadc.quantizer", e.to_string());
    }
    if adc.m_channels >= 2 && adc.reference_aligned_to >= adc.m_channels {
        err(
            "tiadc.reference_aligned_to",
            format!(
                "must be < m_channels ({}), got {}",
                adc.m_channels, adc.reference_aligned_to
            ),
        );
    }
    let mut check_channel = |path: String, ch: &ChannelSection| {
        if !(ch.gain > 0.0 && ch.gain.is_finite()) {
            err(
                &format!("{path}.gain"),
                format!("must be > 0, got {}", ch.gain),
            );
        }
        if !ch.offset_v.is_finite() {
            err(&format!("{path}.offset_v"), "must be finite".into());
        }
        if !(ch.timing_skew_rel.abs() < 1.0) {
            err(
                &format!("{path}.timing_skew_rel"),
                format!("must lie in (-1, 1), got {}", ch.timing_skew_rel),
            );
        }
        if let Some(fc) = ch.cutoff_hz {
            if !(fc > 0.0 && fc.is_finite()) {
                err(
                    &format!("{path}.cutoff_hz"),
                    format!("must be > 0, got {fc}"),
                );
            }
        }
    };
    check_channel("tiadc.reference".into(), &adc.reference);
    if let Some(chs) = &adc.channels {
        for (i, ch) in chs.iter().enumerate() {
            check_channel(format!("tiadc.channels[{i}]"), ch);
        }
    }
    if let Some(chs) = &adc.channels {
        if chs.len() != adc.m_channels {
            err(
                "tiadc.channels",
                format!("expected {} entries, got {}", adc.m_channels, chs.len()),
            );
        }
        let mm = &adc.mismatch;
        if mm.offset_std_v != 0.0
            || mm.gain_std != 0.0
            || mm.timing_std_rel != 0.0
            || mm.cutoff_std_rel.unwrap_or(0.0) != 0.0
            || mm.nominal_cutoff_hz.is_some()
        {
            err(
                "tiadc.channels",
                "explicit channels cannot be combined with a mismatch spread".into(),
            );
        }
        if cfg.scenario == Scenario::Sweep {
            err(
                "tiadc.channels",
                "SWEEP draws channels; remove explicit channels".into(),
            );
        }
    }
    let mm = &adc.mismatch;
    for (name, v) in [
        ("offset_std_v", mm.offset_std_v),
        ("gain_std", mm.gain_std),
        ("timing_std_rel", mm.timing_std_rel),
        ("cutoff_std_rel", mm.cutoff_std_rel.unwrap_or(0.0)),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            err(
                &format!("tiadc.mismatch.{name}"),
                format!("must be >= 0, got {v}"),
            );
        }
    }
    if let Some(fc) = mm.nominal_cutoff_hz {
        if !(fc > 0.0 && fc.is_finite()) {
            err(
                "tiadc.mismatch.nominal_cutoff_hz",
                format!("must be > 0, got {fc}"),
            );
        }
    }

    if cfg.k_frames < 2 {
        err("k_frames", format!("must be >= 2, got {}", cfg.k_frames));
    } else if adc.m_channels >= 2 && !(adc.m_channels * cfg.k_frames).is_power_of_two() {
        err(
            "k_frames",
            format!(
                "m_channels * k_frames must be a power of two, got {}",
                adc.m_channels * cfg.k_frames
            ),
        );
    }

    if !cfg.signal.dc_v.is_finite() {
        err("signal.dc_v", "must be finite".into());
    }
    if cfg.signal.tones.is_empty() {
        err("signal.tones", "at least one tone is required".into());
    }
    for (i, t) in cfg.signal.tones.iter().enumerate() {
        if !(t.amplitude_v > 0.0 && t.amplitude_v.is_finite()) {
            err(
                &format!("signal.tones[{i}].amplitude_v"),
                format!("must be > 0, got {}", t.amplitude_v),
            );
        }
        if !(t.frequency_hz > 0.0 && t.frequency_hz < fs / 2.0) {
            err(
                &format!("signal.tones[{i}].frequency_hz"),
                format!("must lie in (0, {}), got {}", fs / 2.0, t.frequency_hz),
            );
        }
        if !t.phase_rad.is_finite() {
            err(
                &format!("signal.tones[{i}].phase_rad"),
                "must be finite".into(),
            );
        }
    }

    if let Some(sweep) = &cfg.sweep {
        if sweep.values.is_empty() {
            err("sweep.values", "at least one value is required".into());
        }
        if sweep.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            err("sweep.values", "values must be strictly positive".into());
        }
        if sweep.values.windows(2).any(|w| !(w[0] < w[1])) {
            err(
                "sweep.values",
                "values must be sorted strictly ascending".into(),
            );
        }
        if sweep.trials < 1 {
            err("sweep.trials", "must be >= 1".into());
        }
        if sweep.parameter == SweepParameter::TimingStd && sweep.values.iter().any(|v| *v >= 0.5) {
            err(
                "sweep.values",
                "timing spreads must be below 0.5 T_s".into(),
            );
        }
    } else if cfg.scenario == Scenario::Sweep {
        err("sweep", "required for SWEEP".into());
    }

    if cfg.calibration.taps < MIN_TAPS {
        err(
            "calibration.taps",
            format!("must be >= {MIN_TAPS}, got {}", cfg.calibration.taps),
        );
    }
    if !cfg.analysis.spur_threshold_db.is_finite() || cfg.analysis.spur_threshold_db < 0.0 {
        err("analysis.spur_threshold_db", "must be >= 0".into());
    }
    if cfg.output_dir.is_empty() {
        err("output_dir", "must not be empty".into());
    }
    issues
}

impl ExperimentConfig {
    pub fn sample_period(&self) -> f64 {
        1.0 / self.tiadc.sample_rate_hz
    }

    pub fn record_len(&self) -> usize {
        self.tiadc.m_channels * self.k_frames
    }

    pub fn quantizer(&self) -> crate::Result<QuantizerSpec> {
        let q = &self.tiadc.quantizer;
        QuantizerSpec::new(q.bits, q.v_min, q.v_max)
    }

    pub fn signal_spec(&self) -> crate::Result<SignalSpec> {
        let tones = self
            .signal
            .tones
            .iter()
            .map(|t| Tone::new(t.amplitude_v, t.frequency_hz, t.phase_rad))
            .collect::<crate::Result<_>>()?;
        Ok(SignalSpec::new(tones, self.signal.dc_v))
    }

    pub fn spread(&self) -> MismatchSpread {
        let mm = &self.tiadc.mismatch;
        MismatchSpread {
            offset_std: mm.offset_std_v,
            gain_std: mm.gain_std,
            timing_std: mm.timing_std_rel * self.sample_period(),
            cutoff_rel_std: mm.cutoff_std_rel.unwrap_or(0.0),
            nominal_cutoff: mm.nominal_cutoff_hz,
        }
    }

    pub fn channel_params(&self, ch: &ChannelSection) -> crate::Result<ChannelParams> {
        Ok(ChannelParams {
            offset: ch.offset_v,
            gain: ch.gain,
            timing_skew: ch.timing_skew_rel * self.sample_period(),
            filter: ch.cutoff_hz.map(FilterSpec::new).transpose()?,
        })
    }

    /// Converter configuration with channels drawn (or taken verbatim) for
    /// the run seeded by `seed`.
    pub fn adc_config(&self, spread: &MismatchSpread, seed: u64) -> crate::Result<TiAdcConfig> {
        let m = self.tiadc.m_channels;
        let channels = match &self.tiadc.channels {
            Some(chs) => chs
                .iter()
                .map(|c| self.channel_params(c))
                .collect::<crate::Result<_>>()?,
            None => crate::adc::draw_all_channels(spread, m, self.sample_period(), seed)?,
        };
        let cfg = TiAdcConfig {
            m_channels: m,
            sample_rate: self.tiadc.sample_rate_hz,
            jitter_std: self.tiadc.jitter_std_rel * self.sample_period(),
            quantizer: self.quantizer()?,
            channels,
            reference: self.channel_params(&self.tiadc.reference)?,
            reference_aligned_to: self.tiadc.reference_aligned_to,
            rng_seed: seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// JSON schema of the configuration file.
pub fn schema() -> String {
    let schema = schemars::schema_for!(ExperimentConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_fully_defaulted() {
        let cfg = validate("").unwrap();
        assert_eq!(cfg, validate("{}").unwrap());
        assert_eq!(cfg.tiadc.m_channels, 4);
        assert_eq!(cfg.tiadc.quantizer.bits, 8);
        assert_eq!(cfg.k_frames, 1024);
        assert_eq!(cfg.calibration.taps, 32);
        assert_eq!(
            cfg.signal.tones[0].frequency_hz,
            101.0 / 1024.0 * DEFAULT_SAMPLE_RATE
        );
        assert_eq!(cfg.tiadc.reference, ChannelSection::default());
        assert_eq!(cfg.tiadc.mismatch.cutoff_std_rel, Some(0.0));
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn zero_channels_reported_with_path() {
        let issues = validate(r#"{"tiadc": {"m_channels": 0}}"#).unwrap_err();
        assert!(
            issues.iter().any(|i| i.path == "tiadc.m_channels"),
            "{issues:?}"
        );
        assert_eq!(issues[0].line, Some(1));
    }

    #[test]
    fn unsorted_sweep_values_rejected() {
        let text = r#"{
  "scenario": "SWEEP",
  "sweep": {"parameter": "GAIN_STD", "values": [0.01, 0.002]}
}"#;
        let issues = validate(text).unwrap_err();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].path, "sweep.values");
        assert_eq!(issues[0].line, Some(3));
        assert!(issues[0].to_string().contains("sweep.values"));
    }

    #[test]
    fn unknown_keys_rejected_with_location() {
        let text = "{\n  \"tiadc\": {\n    \"m_chanels\": 4\n  }\n}";
        let issues = validate(text).unwrap_err();
        assert_eq!(issues[0].path, "tiadc.m_chanels");
        assert_eq!(issues[0].line, Some(3));
    }

    #[test]
    fn every_violation_is_listed() {
        let text = r#"{"k_frames": 3, "tiadc": {"m_channels": 4, "jitter_std_rel": -1,
            "quantizer": {"bits": 0}}, "calibration": {"taps": 1}}"#;
        let paths: Vec<String> = validate(text)
            .unwrap_err()
            .into_iter()
            .map(|i| i.path)
            .collect();
        for p in [
            "k_frames",
            "tiadc.jitter_std_rel",
            "tiadc.quantizer",
            "calibration.taps",
        ] {
            assert!(paths.iter().any(|x| x == p), "missing {p} in {paths:?}");
        }
    }

    #[test]
    fn scenario_defaults() {
        let cfg = validate(r#"{"scenario": "BANDWIDTH_DEMO"}"#).unwrap();
        assert_eq!(cfg.tiadc.mismatch.nominal_cutoff_hz, Some(5.0e6));
        assert_eq!(cfg.tiadc.mismatch.cutoff_std_rel, Some(0.1));
        let cfg = validate(r#"{"scenario": "SWEEP"}"#).unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.trials, 50);
        assert_eq!(sweep.compensation, Some(Compensation::OffsetGain));
    }

    #[test]
    fn normalized_config_is_a_fixed_point() {
        for text in [
            "{}",
            r#"{"scenario": "SWEEP", "sweep": {"parameter": "TIMING_STD", "values": [0.001, 0.01]}}"#,
            r#"{"scenario": "BANDWIDTH_DEMO", "tiadc": {"quantizer": {"bits": 10}}}"#,
            r#"{"tiadc": {"m_channels": 2, "channels": [{"offset_v": 0.01}, {"gain": 1.01, "cutoff_hz": 3e6}]}, "k_frames": 512}"#,
        ] {
            let once = validate(text).unwrap();
            let twice = validate(&once.to_json()).unwrap();
            assert_eq!(once, twice);
            assert_eq!(once.to_json(), twice.to_json());
        }
    }

    #[test]
    fn explicit_channels_checked() {
        let issues = validate(
            r#"{"tiadc": {"m_channels": 2, "channels": [{"gain": -1}], "mismatch": {"gain_std": 0.1}}}"#,
        )
        .unwrap_err();
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"tiadc.channels[0].gain"));
        assert!(paths.contains(&"tiadc.channels"));
    }

    #[test]
    fn tone_must_sit_below_nyquist() {
        let issues =
            validate(r#"{"signal": {"tones": [{"amplitude_v": 0.5, "frequency_hz": 6e5}]}}"#)
                .unwrap_err();
        assert_eq!(issues[0].path, "signal.tones[0].frequency_hz");
    }
}
