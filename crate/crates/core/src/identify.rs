//! Reference-channel mismatch identification.
//!
//! The reference converter shares the clock of one channel at a time, so
//! every channel can be compared sample-for-sample against a stream taken at
//! its own nominal instants:
//!
//! * offset: difference of the stream means,
//! * gain: square root of the power ratio, after offset removal,
//! * timing: ratio of mean first differences against the preceding channel,
//!   after offset and gain removal.
//!
//! Timing estimates are reported as `dt / T_s` with the simulator's sign
//! convention (positive = samples late). A late channel sees a larger step
//! from its predecessor than the reference does, so the estimate is
//! `E|y_m - y_prev| / E|y_ref - y_prev| - 1`.

use serde::Serialize;

use crate::adc::{ChannelOutputs, TiAdcConfig};
use crate::calibrate::{compensate_gain, compensate_offset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MismatchEstimate {
    pub offsets_v: Vec<f64>,
    pub gains: Vec<f64>,
    /// Estimated skew of each channel in units of T_s.
    pub rel_timing: Vec<f64>,
    /// Frames per channel the estimates were computed from.
    pub k_used: usize,
}

impl MismatchEstimate {
    /// Estimate that corrects nothing.
    pub fn identity(m_channels: usize, k_used: usize) -> Self {
        Self {
            offsets_v: vec![0.0; m_channels],
            gains: vec![1.0; m_channels],
            rel_timing: vec![0.0; m_channels],
            k_used,
        }
    }

    pub fn m_channels(&self) -> usize {
        self.gains.len()
    }
}

/// How the first differences are aggregated in the timing estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DifferenceMode {
    /// Mean of |difference|; rising and falling slopes add up.
    #[default]
    Absolute,
    /// Mean of the signed difference. Cancels for zero-mean periodic input;
    /// kept for comparison.
    Signed,
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "stream lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Input("empty stream".into()));
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn estimate_offset(y_m: &[f64], y_ref: &[f64]) -> Result<f64> {
    check_lengths(y_m, y_ref)?;
    Ok(mean(y_m) - mean(y_ref))
}

/// Expects offsets already removed from both streams.
pub fn estimate_gain(y_m: &[f64], y_ref: &[f64]) -> Result<f64> {
    check_lengths(y_m, y_ref)?;
    let ref_power: f64 = y_ref.iter().map(|v| v * v).sum();
    if !(ref_power > 0.0) {
        return Err(Error::DegenerateSignal(
            "reference stream has zero power".into(),
        ));
    }
    let power: f64 = y_m.iter().map(|v| v * v).sum();
    Ok((power / ref_power).sqrt())
}

pub fn estimate_timing(y_m: &[f64], y_prev: &[f64], y_ref: &[f64]) -> Result<f64> {
    estimate_timing_with(y_m, y_prev, y_ref, DifferenceMode::Absolute)
}

/// `y_prev[k]` must be the sample taken one aggregate period before
/// `y_m[k]`; `y_ref[k]` shares the nominal instant of `y_m[k]`.
pub fn estimate_timing_with(
    y_m: &[f64],
    y_prev: &[f64],
    y_ref: &[f64],
    mode: DifferenceMode,
) -> Result<f64> {
    check_lengths(y_m, y_prev)?;
    check_lengths(y_m, y_ref)?;
    if y_m.len() < 2 {
        return Err(Error::Input(
            "timing estimation needs at least 2 frames".into(),
        ));
    }
    let step = |a: f64, b: f64| match mode {
        DifferenceMode::Absolute => (a - b).abs(),
        DifferenceMode::Signed => a - b,
    };
    let n = y_m.len() as f64;
    let channel_step = y_m
        .iter()
        .zip(y_prev)
        .map(|(&a, &b)| step(a, b))
        .sum::<f64>()
        / n;
    let reference_step = y_ref
        .iter()
        .zip(y_prev)
        .map(|(&a, &b)| step(a, b))
        .sum::<f64>()
        / n;
    if reference_step == 0.0 || !reference_step.is_finite() {
        return Err(Error::DegenerateSignal(
            "reference step is zero; input does not move between samples".into(),
        ));
    }
    let r = channel_step / reference_step - 1.0;
    if !(r.abs() < 0.5) {
        return Err(Error::Divergence(r.abs()));
    }
    Ok(r)
}

/// Aligned `(y_m, y_prev, y_ref)` for channel `m`. Channel 0's predecessor is
/// channel M-1 one frame earlier, so its first frame is dropped.
fn predecessor_views<'a>(
    streams: &'a [Vec<f64>],
    reference: &'a [f64],
    m: usize,
) -> (&'a [f64], &'a [f64], &'a [f64]) {
    let k = streams[m].len();
    if m == 0 {
        let last = streams.len() - 1;
        (&streams[0][1..], &streams[last][..k - 1], &reference[1..])
    } else {
        (&streams[m][..], &streams[m - 1][..], reference)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentifyOptions {
    pub difference_mode: DifferenceMode,
}

/// Runs offset, then gain, then timing identification on every channel.
///
/// `reference_for(m)` returns a reference capture aligned to channel `m`
/// with the same number of frames as `out`. The capture already held in
/// `out` is used for `cfg.reference_aligned_to`.
pub fn estimate_all<F>(
    out: &ChannelOutputs,
    cfg: &TiAdcConfig,
    reference_for: F,
) -> Result<MismatchEstimate>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    estimate_all_with(out, cfg, reference_for, &IdentifyOptions::default())
}

pub fn estimate_all_with<F>(
    out: &ChannelOutputs,
    cfg: &TiAdcConfig,
    mut reference_for: F,
    opts: &IdentifyOptions,
) -> Result<MismatchEstimate>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    let m_channels = out.m_channels();
    if m_channels != cfg.m_channels {
        return Err(Error::Input(format!(
            "outputs hold {m_channels} channels, configuration expects {}",
            cfg.m_channels
        )));
    }
    let k = out.k_frames;
    if k < 2 {
        return Err(Error::Input(
            "identification needs at least 2 frames".into(),
        ));
    }

    let references: Vec<Vec<f64>> = (0..m_channels)
        .map(|m| {
            if m == cfg.reference_aligned_to {
                return Ok(out.reference.clone());
            }
            let r = reference_for(m).map_err(|e| e.in_channel(m))?;
            if r.len() != k {
                return Err(Error::Input(format!(
                    "reference capture has {} frames, expected {k}",
                    r.len()
                ))
                .in_channel(m));
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;

    let offsets_v = (0..m_channels)
        .map(|m| estimate_offset(&out.per_channel[m], &references[m]).map_err(|e| e.in_channel(m)))
        .collect::<Result<Vec<_>>>()?;
    let without_offset: Vec<Vec<f64>> = out
        .per_channel
        .iter()
        .zip(&offsets_v)
        .map(|(y, &o)| compensate_offset(y, o))
        .collect();

    let gains = (0..m_channels)
        .map(|m| estimate_gain(&without_offset[m], &references[m]).map_err(|e| e.in_channel(m)))
        .collect::<Result<Vec<_>>>()?;
    let corrected: Vec<Vec<f64>> = without_offset
        .iter()
        .zip(&gains)
        .map(|(y, &g)| compensate_gain(y, g))
        .collect::<Result<_>>()?;

    let rel_timing = (0..m_channels)
        .map(|m| {
            let (y, prev, r) = predecessor_views(&corrected, &references[m], m);
            estimate_timing_with(y, prev, r, opts.difference_mode).map_err(|e| e.in_channel(m))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MismatchEstimate {
        offsets_v,
        gains,
        rel_timing,
        k_used: k,
    })
}
