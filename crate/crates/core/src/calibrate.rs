//! Digital correction of identified mismatches.
//!
//! Offset and gain are undone per channel. Timing skew is undone on the
//! interleaved grid: a sample taken at `(n + r) T_s` is replaced by a
//! Hann-windowed sinc interpolation of its neighbours evaluated at `n T_s`.
//! The interpolator sees zeros past the ends of the record, so outputs near
//! either end are transient. Taps are adjusted slightly so that constants and
//! straight lines pass through exactly.

use std::f64::consts::PI;
use std::ops::Range;

use serde::Serialize;

use crate::adc::{interleave_streams, ChannelOutputs};
use crate::error::{Error, Result};
use crate::identify::MismatchEstimate;

pub const DEFAULT_TAPS: usize = 32;
pub const MIN_TAPS: usize = 4;
/// Residual-correction passes run by [`calibrate`] after the first estimate.
pub const REFINEMENT_PASSES: usize = 1;

pub fn compensate_offset(y: &[f64], offset: f64) -> Vec<f64> {
    y.iter().map(|v| v - offset).collect()
}

pub fn compensate_gain(y: &[f64], gain: f64) -> Result<Vec<f64>> {
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::Input(format!("gain must be > 0, got {gain}")));
    }
    Ok(y.iter().map(|v| v / gain).collect())
}

/// `2L+1`-tap interpolator that reads a uniformly sampled stream `r` samples
/// earlier than the grid it was taken on.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalDelay {
    taps: Vec<f64>,
    half: usize,
}

impl FractionalDelay {
    pub fn new(r: f64, half_taps: usize) -> Result<Self> {
        if !(r.abs() < 0.5) {
            return Err(Error::Divergence(r.abs()));
        }
        if half_taps < MIN_TAPS {
            return Err(Error::Input(format!(
                "interpolator needs L >= {MIN_TAPS}, got {half_taps}"
            )));
        }
        let support = (half_taps + 1) as f64;
        let offsets: Vec<f64> = (-(half_taps as i64)..=half_taps as i64)
            .map(|j| j as f64 + r)
            .collect();
        let window: Vec<f64> = offsets
            .iter()
            .map(|x| 0.5 * (1.0 + (PI * x / support).cos()))
            .collect();
        // sin(pi (j + r)) = (-1)^j sin(pi r), exact zeros at r = 0
        let s = (PI * r).sin();
        let mut taps: Vec<f64> = offsets
            .iter()
            .zip(&window)
            .enumerate()
            .map(|(i, (&x, &w))| {
                let sinc = if x == 0.0 {
                    1.0
                } else {
                    let sign = if (i + half_taps).is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    };
                    sign * s / (PI * x)
                };
                sinc * w
            })
            .collect();

        // Add a w + b x w so that sum(h) = 1 and sum(x h) = 0; constants and
        // ramps then pass exactly.
        let sum = |f: &dyn Fn(usize) -> f64| (0..taps.len()).map(f).sum::<f64>();
        let (h0, h1) = (sum(&|i| taps[i]), sum(&|i| offsets[i] * taps[i]));
        let w0 = sum(&|i| window[i]);
        let w1 = sum(&|i| offsets[i] * window[i]);
        let w2 = sum(&|i| offsets[i] * offsets[i] * window[i]);
        let det = w0 * w2 - w1 * w1;
        let a = ((1.0 - h0) * w2 + h1 * w1) / det;
        let b = (-h1 * w0 - (1.0 - h0) * w1) / det;
        for ((t, &x), &w) in taps.iter_mut().zip(&offsets).zip(&window) {
            *t += a * w + b * x * w;
        }
        Ok(Self {
            taps,
            half: half_taps,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn half_taps(&self) -> usize {
        self.half
    }

    /// Interpolated value at grid point `n` of `x`, zeros outside `x`.
    pub fn apply_at(&self, x: &[f64], n: usize) -> f64 {
        let start = n as i64 - self.half as i64;
        self.taps
            .iter()
            .enumerate()
            .filter_map(|(i, &h)| {
                let idx = start + i as i64;
                (idx >= 0 && (idx as usize) < x.len()).then(|| h * x[idx as usize])
            })
            .sum()
    }
}

/// Corrected samples plus the range not affected by zero padding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Compensated {
    pub samples: Vec<f64>,
    /// Leading and trailing outputs that saw zero padding.
    pub transient: usize,
}

impl Compensated {
    pub fn valid_range(&self) -> Range<usize> {
        let n = self.samples.len();
        self.transient.min(n)..n.saturating_sub(self.transient).max(self.transient.min(n))
    }

    pub fn valid(&self) -> &[f64] {
        &self.samples[self.valid_range()]
    }

    pub fn is_transient(&self, n: usize) -> bool {
        !self.valid_range().contains(&n)
    }
}

/// Shifts a uniformly sampled stream taken at `(n + r) T_s` back onto `n T_s`.
pub fn compensate_timing(y: &[f64], r: f64, half_taps: usize) -> Result<Compensated> {
    let fd = FractionalDelay::new(r, half_taps)?;
    Ok(Compensated {
        samples: (0..y.len()).map(|n| fd.apply_at(y, n)).collect(),
        transient: half_taps,
    })
}

/// Which corrections [`calibrate_with`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stages {
    pub offset: bool,
    pub gain: bool,
    pub timing: bool,
}

impl Stages {
    pub const ALL: Stages = Stages {
        offset: true,
        gain: true,
        timing: true,
    };
    pub const OFFSET: Stages = Stages {
        offset: true,
        gain: false,
        timing: false,
    };
    pub const OFFSET_GAIN: Stages = Stages {
        offset: true,
        gain: true,
        timing: false,
    };
}

/// Offset, gain and timing correction of every channel, then interleaving.
pub fn calibrate(
    out: &ChannelOutputs,
    est: &MismatchEstimate,
    half_taps: usize,
) -> Result<Compensated> {
    calibrate_with(out, est, half_taps, Stages::ALL)
}

pub fn calibrate_with(
    out: &ChannelOutputs,
    est: &MismatchEstimate,
    half_taps: usize,
    stages: Stages,
) -> Result<Compensated> {
    let m_channels = out.m_channels();
    if est.m_channels() != m_channels
        || est.offsets_v.len() != m_channels
        || est.rel_timing.len() != m_channels
    {
        return Err(Error::Input(format!(
            "estimate covers {} channels, outputs hold {m_channels}",
            est.m_channels()
        )));
    }
    let corrected: Vec<Vec<f64>> = out
        .per_channel
        .iter()
        .enumerate()
        .map(|(m, y)| {
            let y = if stages.offset {
                compensate_offset(y, est.offsets_v[m])
            } else {
                y.clone()
            };
            if stages.gain {
                compensate_gain(&y, est.gains[m]).map_err(|e| e.in_channel(m))
            } else {
                Ok(y)
            }
        })
        .collect::<Result<_>>()?;
    let x = interleave_streams(&corrected);
    if !stages.timing {
        return Ok(Compensated {
            samples: x,
            transient: 0,
        });
    }

    let inverse = est
        .rel_timing
        .iter()
        .enumerate()
        .map(|(m, &r)| FractionalDelay::new(r, half_taps).map_err(|e| e.in_channel(m)))
        .collect::<Result<Vec<_>>>()?;
    let forward = est
        .rel_timing
        .iter()
        .map(|&r| FractionalDelay::new(-r, half_taps))
        .collect::<Result<Vec<_>>>()?;
    let apply = |bank: &[FractionalDelay], v: &[f64]| -> Vec<f64> {
        (0..v.len())
            .map(|n| bank[n % m_channels].apply_at(v, n))
            .collect()
    };
    // The single pass treats neighbouring samples as uniformly spaced, which
    // they are not; each refinement re-skews the estimate and corrects the
    // residual, shrinking the error by roughly a factor |r| per pass.
    let mut samples = apply(&inverse, &x);
    for _ in 0..REFINEMENT_PASSES {
        let reskewed = apply(&forward, &samples);
        let residual: Vec<f64> = x.iter().zip(&reskewed).map(|(a, b)| a - b).collect();
        for (s, c) in samples.iter_mut().zip(apply(&inverse, &residual)) {
            *s += c;
        }
    }
    Ok(Compensated {
        samples,
        transient: calibration_transient(half_taps),
    })
}

/// Outputs at each end of [`calibrate`]'s result that depend on zero padding.
pub fn calibration_transient(half_taps: usize) -> usize {
    (2 * REFINEMENT_PASSES + 1) * half_taps
}
