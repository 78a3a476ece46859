//! Power spectra, dynamic-range metrics, and interleaving-spur bookkeeping.
//!
//! The noise floor is the mean power of the bins that remain after
//! iteratively trimming everything more than `spur_threshold_db` above the
//! current floor estimate; the trimmed bins are the reported spurs. For an
//! ideal B-bit quantizer this floor sits at `-(6.02 B + 1.76) - 10 log10(N/2)`
//! dBc.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power ratios below this are clamped before taking logarithms (-400 dB).
const MIN_RATIO: f64 = 1e-40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    /// Periodic window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (TAU * i as f64 / n as f64).cos()))
                .collect(),
        }
    }

    fn default_carrier_span(self) -> usize {
        match self {
            Window::Rectangular => 0,
            Window::Hann => 16,
        }
    }

    fn default_dc_span(self) -> usize {
        match self {
            Window::Rectangular => 0,
            Window::Hann => 1,
        }
    }
}

/// One-sided power spectrum, normalized so the bins sum to the mean-square
/// value of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_freqs: Vec<f64>,
    pub power: Vec<f64>,
}

pub fn power_spectrum(x: &[f64], sample_rate: f64, window: Window) -> Result<Spectrum> {
    let n = x.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Size(n));
    }
    let w = window.coefficients(n);
    let w_energy: f64 = w.iter().map(|v| v * v).sum();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .zip(&w)
        .map(|(&v, &wv)| Complex::new(v * wv, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let scale = 1.0 / (n as f64 * w_energy);
    let power = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || k == half {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let bin_freqs = (0..=half)
        .map(|k| k as f64 * sample_rate / n as f64)
        .collect();
    Ok(Spectrum { bin_freqs, power })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpurLabel {
    OffsetSpur,
    SignalImageSpur,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spur {
    pub bin: usize,
    pub freq_hz: f64,
    pub power_dbc: f64,
    pub label: SpurLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub sample_rate: f64,
    /// Record length the spectrum was computed from.
    pub n: usize,
    pub window: Window,
    #[serde(skip)]
    pub bin_freqs: Vec<f64>,
    #[serde(skip)]
    pub power_dbc: Vec<f64>,
    pub carrier_bin: usize,
    pub carrier_freq_hz: f64,
    pub sinad_db: f64,
    pub sfdr_db: f64,
    pub enob_bits: f64,
    pub noise_floor_dbc: f64,
    pub spurs: Vec<Spur>,
}

impl SpectrumReport {
    pub fn bin_of(&self, freq: f64) -> usize {
        (freq / self.sample_rate * self.n as f64).round() as usize
    }

    fn linear(dbc: f64) -> f64 {
        10f64.powf(dbc / 10.0)
    }

    /// Total spur power relative to the carrier (linear).
    pub fn spur_power(&self) -> f64 {
        self.spurs
            .iter()
            .map(|s| Self::linear(s.power_dbc))
            .fold(0.0, |a, b| a + b)
    }

    /// Spur power carrying `label`, relative to the carrier (linear).
    pub fn spur_power_labeled(&self, label: SpurLabel) -> f64 {
        self.spurs
            .iter()
            .filter(|s| s.label == label)
            .map(|s| Self::linear(s.power_dbc))
            .fold(0.0, |a, b| a + b)
    }

    /// Share of above-floor spur power carrying `label`; 0 when there are no
    /// spurs.
    pub fn spur_fraction(&self, label: SpurLabel) -> f64 {
        let total = self.spur_power();
        if total > 0.0 {
            self.spur_power_labeled(label) / total
        } else {
            0.0
        }
    }

    pub fn count_labeled(&self, label: SpurLabel) -> usize {
        self.spurs.iter().filter(|s| s.label == label).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub window: Window,
    /// Nearest bin to this frequency is the carrier; otherwise the largest
    /// non-DC bin.
    pub carrier_hint: Option<f64>,
    pub spur_threshold_db: f64,
    /// Bins on each side of the carrier counted as carrier power.
    pub carrier_span: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            window: Window::Rectangular,
            carrier_hint: None,
            spur_threshold_db: 15.0,
            carrier_span: None,
        }
    }
}

pub fn analyze(x: &[f64], sample_rate: f64, carrier_hint: Option<f64>) -> Result<SpectrumReport> {
    analyze_with(
        x,
        sample_rate,
        &AnalysisOptions {
            carrier_hint,
            ..Default::default()
        },
    )
}

pub fn analyze_with(x: &[f64], sample_rate: f64, opts: &AnalysisOptions) -> Result<SpectrumReport> {
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSignal("all-zero input".into()));
    }
    let spec = power_spectrum(x, sample_rate, opts.window)?;
    let n = x.len();
    let bins = spec.power.len();
    let dc_span = opts.window.default_dc_span();
    let span = opts
        .carrier_span
        .unwrap_or_else(|| opts.window.default_carrier_span());

    let carrier_bin = match opts.carrier_hint {
        Some(f) => ((f / sample_rate * n as f64).round().max(0.0) as usize).min(bins - 1),
        None => (dc_span + 1..bins)
            .max_by(|&a, &b| spec.power[a].total_cmp(&spec.power[b]))
            .ok_or_else(|| Error::DegenerateSignal("no non-DC bins".into()))?,
    };
    if carrier_bin <= dc_span {
        return Err(Error::DegenerateSignal(format!(
            "carrier bin {carrier_bin} falls inside the DC region"
        )));
    }
    let carrier_lo = carrier_bin.saturating_sub(span).max(dc_span + 1);
    let carrier_hi = (carrier_bin + span).min(bins - 1);
    let in_carrier = |k: usize| (carrier_lo..=carrier_hi).contains(&k);

    let carrier_power: f64 = spec.power[carrier_lo..=carrier_hi].iter().sum();
    if !(carrier_power > 0.0) {
        return Err(Error::DegenerateSignal("carrier bin holds no power".into()));
    }
    let others: Vec<usize> = (dc_span + 1..bins).filter(|&k| !in_carrier(k)).collect();
    let other_power: f64 = others.iter().map(|&k| spec.power[k]).sum();

    let ratio_db = |p: f64| 10.0 * (p / carrier_power).max(MIN_RATIO).log10();
    let power_dbc: Vec<f64> = spec.power.iter().map(|&p| ratio_db(p)).collect();

    let sinad_db = -ratio_db(other_power);
    let sfdr_db = -others
        .iter()
        .map(|&k| power_dbc[k])
        .fold(f64::NEG_INFINITY, f64::max);

    let (floor, spur_bins) = trimmed_floor(&spec.power, &others, opts.spur_threshold_db);
    let spurs = spur_bins
        .into_iter()
        .map(|k| Spur {
            bin: k,
            freq_hz: spec.bin_freqs[k],
            power_dbc: power_dbc[k],
            label: SpurLabel::Unclassified,
        })
        .collect();

    Ok(SpectrumReport {
        sample_rate,
        n,
        window: opts.window,
        carrier_freq_hz: spec.bin_freqs[carrier_bin],
        bin_freqs: spec.bin_freqs,
        power_dbc,
        carrier_bin,
        sinad_db,
        sfdr_db: if others.is_empty() { 0.0 } else { sfdr_db },
        enob_bits: (sinad_db - 1.76) / 6.02,
        noise_floor_dbc: ratio_db(floor),
        spurs,
    })
}

/// Mean power over `candidates` after repeatedly removing bins more than
/// `threshold_db` above the running mean. Returns the floor and the removed
/// bins in ascending order.
fn trimmed_floor(power: &[f64], candidates: &[usize], threshold_db: f64) -> (f64, Vec<usize>) {
    let factor = 10f64.powf(threshold_db / 10.0);
    let mut kept: Vec<usize> = candidates.to_vec();
    loop {
        if kept.is_empty() {
            return (0.0, candidates.to_vec());
        }
        let mean = kept.iter().map(|&k| power[k]).sum::<f64>() / kept.len() as f64;
        let before = kept.len();
        kept.retain(|&k| power[k] <= mean * factor);
        if kept.len() == before {
            let spurs = candidates
                .iter()
                .copied()
                .filter(|&k| power[k] > mean * factor)
                .collect();
            return (mean, spurs);
        }
    }
}

/// Folds `freq` into the first Nyquist zone [0, fs/2].
pub fn fold_frequency(freq: f64, sample_rate: f64) -> f64 {
    let r = freq.rem_euclid(sample_rate);
    if r > sample_rate / 2.0 {
        sample_rate - r
    } else {
        r
    }
}

/// Where mismatch spurs of an M-channel interleaved converter land.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpurPrediction {
    /// k f_s / M: offset mismatch.
    pub offset: Vec<f64>,
    /// |+-f0 + k f_s / M|: gain, timing and bandwidth mismatch.
    pub image: Vec<f64>,
}

pub fn predict_spurs(m_channels: usize, f0: f64, sample_rate: f64) -> Result<SpurPrediction> {
    if m_channels == 0 {
        return Err(Error::Domain("channel count must be >= 1".into()));
    }
    if !(f0 > 0.0 && f0 < sample_rate / 2.0) {
        return Err(Error::Domain(format!(
            "carrier {f0} Hz outside (0, {}) Hz",
            sample_rate / 2.0
        )));
    }
    let eps = 1e-9 * sample_rate;
    let step = sample_rate / m_channels as f64;
    let dedup = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < eps);
        v
    };
    let offset = dedup(
        (1..=m_channels / 2)
            .map(|k| fold_frequency(k as f64 * step, sample_rate))
            .collect(),
    );
    let image = dedup(
        (0..m_channels)
            .flat_map(|k| [f0, -f0].map(|s| fold_frequency(s + k as f64 * step, sample_rate)))
            .filter(|f| (f - f0).abs() >= eps)
            .collect(),
    );
    Ok(SpurPrediction { offset, image })
}

/// Labels each detected spur by the nearest prediction within
/// `tolerance_bins`. Offset predictions win ties.
pub fn label_spurs(
    report: &SpectrumReport,
    predicted: &SpurPrediction,
    tolerance_bins: usize,
) -> SpectrumReport {
    let near = |bin: usize, set: &[f64]| {
        set.iter()
            .any(|&f| report.bin_of(f).abs_diff(bin) <= tolerance_bins)
    };
    let mut out = report.clone();
    for spur in &mut out.spurs {
        spur.label = if near(spur.bin, &predicted.offset) {
            SpurLabel::OffsetSpur
        } else if near(spur.bin, &predicted.image) {
            SpurLabel::SignalImageSpur
        } else {
            SpurLabel::Unclassified
        };
    }
    out
}

/// Frequency of DFT bin `bin` in an `n`-point record.
pub fn coherent_frequency(bin: usize, n: usize, sample_rate: f64) -> f64 {
    bin as f64 * sample_rate / n as f64
}

/// Odd bin closest to `target_freq`; odd bins are coprime to a power-of-two
/// record length, so every sample lands on a distinct phase.
pub fn nearest_coherent_bin(target_freq: f64, n: usize, sample_rate: f64) -> usize {
    let ideal = target_freq / sample_rate * n as f64;
    let base = ideal.max(0.0).floor() as usize;
    (base.saturating_sub(2)..=base + 2)
        .filter(|b| b % 2 == 1 && *b < n / 2)
        .min_by(|&a, &b| {
            (a as f64 - ideal)
                .abs()
                .total_cmp(&(b as f64 - ideal).abs())
        })
        .unwrap_or(1)
}
