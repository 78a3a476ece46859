//! Analytic continuous-time test signals.
//!
//! A [`SignalSpec`] is a DC level plus a finite sum of sinusoids. Filtering
//! through a first-order low-pass is applied tone by tone in closed form, so
//! the filtered signal can still be evaluated exactly at any instant, which
//! the sampler needs for skewed and jittered sample times.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};

/// Wraps an angle into (-pi, pi].
pub fn normalize_phase(phase: f64) -> f64 {
    let wrapped = (phase + PI).rem_euclid(TAU) - PI;
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tone {
    amplitude: f64,
    frequency: f64,
    phase: f64,
}

impl Tone {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Input(format!(
                "tone amplitude must be finite and >= 0, got {amplitude}"
            )));
        }
        if !(frequency >= 0.0 && frequency.is_finite()) {
            return Err(Error::Input(format!(
                "tone frequency must be finite and >= 0, got {frequency}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::Input(format!(
                "tone phase must be finite, got {phase}"
            )));
        }
        Ok(Self {
            amplitude,
            frequency,
            phase: normalize_phase(phase),
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (TAU * self.frequency * t + self.phase).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SignalSpec {
    pub tones: Vec<Tone>,
    pub dc: f64,
}

impl SignalSpec {
    pub fn new(tones: Vec<Tone>, dc: f64) -> Self {
        Self { tones, dc }
    }

    pub fn sine(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        Ok(Self::new(
            vec![Tone::new(amplitude, frequency, phase)?],
            0.0,
        ))
    }

    pub fn dc(level: f64) -> Self {
        Self::new(Vec::new(), level)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.tones
            .iter()
            .fold(self.dc, |acc, tone| acc + tone.eval(t))
    }

    /// Upper bound on |x(t)|.
    pub fn peak(&self) -> f64 {
        self.dc.abs() + self.tones.iter().map(|t| t.amplitude).sum::<f64>()
    }

    pub fn filtered(&self, filter: &FilterSpec) -> Self {
        let tones = self
            .tones
            .iter()
            .map(|tone| {
                let (gain, shift) = filter.response(tone.frequency);
                Tone {
                    amplitude: tone.amplitude * gain,
                    frequency: tone.frequency,
                    phase: normalize_phase(tone.phase + shift),
                }
            })
            .collect();
        Self { tones, dc: self.dc }
    }
}

pub fn eval_signal(spec: &SignalSpec, t: f64) -> f64 {
    spec.eval(t)
}

pub fn apply_filter(spec: &SignalSpec, filter: &FilterSpec) -> SignalSpec {
    spec.filtered(filter)
}

/// First-order low-pass, -3 dB at `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterSpec {
    cutoff: f64,
}

impl FilterSpec {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0) || cutoff.is_nan() {
            return Err(Error::Input(format!(
                "filter cutoff must be > 0, got {cutoff}"
            )));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn magnitude(&self, frequency: f64) -> f64 {
        self.response(frequency).0
    }

    /// (magnitude, phase shift in radians) at `frequency`.
    pub fn response(&self, frequency: f64) -> (f64, f64) {
        let ratio = frequency / self.cutoff;
        (1.0 / (1.0 + ratio * ratio).sqrt(), -ratio.atan())
    }

    /// Impulse response h(t) = 2 pi fc exp(-2 pi fc t) for t >= 0.
    pub fn impulse(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            let wc = TAU * self.cutoff;
            wc * (-wc * t).exp()
        }
    }
}
