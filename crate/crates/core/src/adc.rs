//! Behavioral model of an M-channel time-interleaved ADC with a reference
//! channel.
//!
//! Channel `m` nominally samples at `(k*M + m) * T_s`, where `T_s` is the
//! aggregate output period. Each sample passes through
//! filter -> skewed/jittered sampling -> gain -> offset -> quantizer.
//! The reference channel shares the clock of one selected channel.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantizer::QuantizerSpec;
use crate::rng::{self, Purpose};
use crate::signal::{FilterSpec, SignalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    /// Additive error in volts.
    pub offset: f64,
    pub gain: f64,
    /// Deviation of the sampling instant from nominal, in seconds. Positive
    /// means the channel samples late.
    pub timing_skew: f64,
    /// Input bandwidth; `None` is an ideal all-pass front end.
    pub filter: Option<FilterSpec>,
}

impl ChannelParams {
    pub const IDEAL: ChannelParams = ChannelParams {
        offset: 0.0,
        gain: 1.0,
        timing_skew: 0.0,
        filter: None,
    };

    pub fn ideal() -> Self {
        Self::IDEAL
    }

    fn validate(&self, sample_period: f64, what: &str) -> Result<()> {
        if !self.offset.is_finite() {
            return Err(Error::Config(format!("{what}: offset must be finite")));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::Config(format!(
                "{what}: gain must be > 0, got {}",
                self.gain
            )));
        }
        if !(self.timing_skew.abs() < sample_period) {
            return Err(Error::Config(format!(
                "{what}: |timing_skew| must be below one sample period ({sample_period} s), got {}",
                self.timing_skew
            )));
        }
        Ok(())
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// Selects a converter inside the interleaved array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelId {
    Channel(usize),
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiAdcConfig {
    pub m_channels: usize,
    /// Aggregate output rate f_s in Hz.
    pub sample_rate: f64,
    /// Standard deviation of per-sample clock jitter, in seconds.
    pub jitter_std: f64,
    pub quantizer: QuantizerSpec,
    pub channels: Vec<ChannelParams>,
    pub reference: ChannelParams,
    pub reference_aligned_to: usize,
    pub rng_seed: u64,
}

impl TiAdcConfig {
    /// `m` ideal channels, ideal reference aligned to channel 0, no jitter.
    pub fn ideal(m: usize, sample_rate: f64, quantizer: QuantizerSpec) -> Self {
        Self {
            m_channels: m,
            sample_rate,
            jitter_std: 0.0,
            quantizer,
            channels: vec![ChannelParams::IDEAL; m],
            reference: ChannelParams::IDEAL,
            reference_aligned_to: 0,
            rng_seed: 0,
        }
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_channels < 2 {
            return Err(Error::Config(format!(
                "m_channels must be >= 2, got {}",
                self.m_channels
            )));
        }
        if self.channels.len() != self.m_channels {
            return Err(Error::Config(format!(
                "expected {} channel parameter sets, got {}",
                self.m_channels,
                self.channels.len()
            )));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Config(format!(
                "sample_rate must be > 0, got {}",
                self.sample_rate
            )));
        }
        if !(self.jitter_std >= 0.0 && self.jitter_std.is_finite()) {
            return Err(Error::Config(format!(
                "jitter_std must be >= 0, got {}",
                self.jitter_std
            )));
        }
        if self.reference_aligned_to >= self.m_channels {
            return Err(Error::Config(format!(
                "reference_aligned_to must be in 0..{}, got {}",
                self.m_channels, self.reference_aligned_to
            )));
        }
        let ts = self.sample_period();
        for (m, ch) in self.channels.iter().enumerate() {
            ch.validate(ts, &format!("channel {m}"))?;
        }
        self.reference.validate(ts, "reference")
    }

    fn params(&self, id: ChannelId) -> Result<(&ChannelParams, usize)> {
        match id {
            ChannelId::Channel(m) if m < self.m_channels && m < self.channels.len() => {
                Ok((&self.channels[m], m))
            }
            ChannelId::Channel(m) => Err(Error::Config(format!(
                "channel index {m} out of range 0..{}",
                self.m_channels
            ))),
            ChannelId::Reference if self.reference_aligned_to < self.m_channels => {
                Ok((&self.reference, self.reference_aligned_to))
            }
            ChannelId::Reference => Err(Error::Config(format!(
                "reference_aligned_to {} out of range 0..{}",
                self.reference_aligned_to, self.m_channels
            ))),
        }
    }
}

/// Deinterleaved converter output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelOutputs {
    /// `per_channel[m][k]` is channel m's reconstructed voltage in frame k.
    pub per_channel: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
    pub codes: Vec<Vec<u32>>,
    pub reference_codes: Vec<u32>,
    pub k_frames: usize,
    /// Per-channel count of pipeline values outside the quantizer range.
    pub saturations: Vec<usize>,
    pub reference_saturations: usize,
}

impl ChannelOutputs {
    pub fn m_channels(&self) -> usize {
        self.per_channel.len()
    }

    pub fn total_saturations(&self) -> usize {
        self.saturations.iter().sum::<usize>() + self.reference_saturations
    }

    pub fn interleaved(&self) -> Vec<f64> {
        interleave_streams(&self.per_channel)
    }
}

/// Sampling instant of frame `k` on channel `id`. Jitter is drawn from `rng`;
/// one standard normal is consumed per call whether or not jitter is enabled.
pub fn sample_instant<R: Rng + ?Sized>(
    cfg: &TiAdcConfig,
    id: ChannelId,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    let (params, slot) = cfg.params(id)?;
    let z: f64 = rng.sample(StandardNormal);
    let n = (k * cfg.m_channels + slot) as f64;
    Ok(n * cfg.sample_period() + params.timing_skew + cfg.jitter_std * z)
}

struct Stream {
    values: Vec<f64>,
    codes: Vec<u32>,
    saturations: usize,
}

fn run_channel(
    cfg: &TiAdcConfig,
    signal: &SignalSpec,
    id: ChannelId,
    stream_index: u64,
    k_frames: usize,
) -> Result<Stream> {
    let (params, _) = cfg.params(id)?;
    let filtered = match &params.filter {
        Some(f) => signal.filtered(f),
        None => signal.clone(),
    };
    let mut rng = rng::stream(cfg.rng_seed, Purpose::Jitter, stream_index);
    let mut out = Stream {
        values: Vec::with_capacity(k_frames),
        codes: Vec::with_capacity(k_frames),
        saturations: 0,
    };
    for k in 0..k_frames {
        let t = sample_instant(cfg, id, k, &mut rng)?;
        let v = params.gain * filtered.eval(t) + params.offset;
        let q = cfg.quantizer.quantize(v);
        out.values.push(q.value);
        out.codes.push(q.code);
        out.saturations += usize::from(q.saturated);
    }
    Ok(out)
}

/// Runs every channel and the reference for `k_frames` frames.
pub fn simulate(cfg: &TiAdcConfig, signal: &SignalSpec, k_frames: usize) -> Result<ChannelOutputs> {
    cfg.validate()?;
    if k_frames == 0 {
        return Err(Error::Input("k_frames must be >= 1".into()));
    }
    let mut per_channel = Vec::with_capacity(cfg.m_channels);
    let mut codes = Vec::with_capacity(cfg.m_channels);
    let mut saturations = Vec::with_capacity(cfg.m_channels);
    for m in 0..cfg.m_channels {
        let s = run_channel(cfg, signal, ChannelId::Channel(m), m as u64, k_frames)?;
        per_channel.push(s.values);
        codes.push(s.codes);
        saturations.push(s.saturations);
    }
    let r = run_channel(
        cfg,
        signal,
        ChannelId::Reference,
        rng::REFERENCE_INDEX,
        k_frames,
    )?;
    Ok(ChannelOutputs {
        per_channel,
        reference: r.values,
        codes,
        reference_codes: r.codes,
        k_frames,
        saturations,
        reference_saturations: r.saturations,
    })
}

/// Reference capture with the reference clock moved to `aligned_to`. Channel
/// streams are not touched, so this pairs with an earlier [`simulate`] call.
pub fn simulate_reference(
    cfg: &TiAdcConfig,
    signal: &SignalSpec,
    k_frames: usize,
    aligned_to: usize,
) -> Result<Vec<f64>> {
    let mut cfg = cfg.clone();
    cfg.reference_aligned_to = aligned_to;
    cfg.validate()?;
    Ok(run_channel(
        &cfg,
        signal,
        ChannelId::Reference,
        rng::REFERENCE_INDEX,
        k_frames,
    )?
    .values)
}

pub fn interleave(out: &ChannelOutputs) -> Vec<f64> {
    out.interleaved()
}

/// `x[k*M + m] = streams[m][k]`. All streams must have the same length.
pub fn interleave_streams<T: Copy>(streams: &[Vec<T>]) -> Vec<T> {
    let k_frames = streams.first().map_or(0, Vec::len);
    debug_assert!(streams.iter().all(|s| s.len() == k_frames));
    (0..k_frames)
        .flat_map(|k| streams.iter().map(move |s| s[k]))
        .collect()
}

/// Inverse of [`interleave_streams`]. Trailing samples that do not fill a
/// whole frame are dropped.
pub fn deinterleave<T: Copy>(x: &[T], m_channels: usize) -> Vec<Vec<T>> {
    assert!(m_channels > 0, "m_channels must be positive");
    let k_frames = x.len() / m_channels;
    (0..m_channels)
        .map(|m| (0..k_frames).map(|k| x[k * m_channels + m]).collect())
        .collect()
}

/// Standard deviations of the random channel mismatches.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MismatchSpread {
    pub offset_std: f64,
    pub gain_std: f64,
    /// Seconds.
    pub timing_std: f64,
    /// Relative to `nominal_cutoff`.
    pub cutoff_rel_std: f64,
    pub nominal_cutoff: Option<f64>,
}

fn truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mean: f64,
    std: f64,
    accept: impl Fn(f64) -> bool,
) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = mean + std * z;
        if accept(v) {
            return v;
        }
    }
}

/// Draws one channel's mismatches. Draw order is fixed (offset, gain, skew,
/// cutoff) so changing one standard deviation does not reshuffle the others.
pub fn draw_channel_params<R: Rng + ?Sized>(
    spread: &MismatchSpread,
    sample_period: f64,
    rng: &mut R,
) -> Result<ChannelParams> {
    let stds = [
        spread.offset_std,
        spread.gain_std,
        spread.timing_std,
        spread.cutoff_rel_std,
    ];
    if stds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::Input(format!(
            "mismatch standard deviations must be finite and >= 0, got {stds:?}"
        )));
    }
    let offset = truncated_normal(rng, 0.0, spread.offset_std, |_| true);
    let gain = truncated_normal(rng, 1.0, spread.gain_std, |g| g > 0.0);
    let half = sample_period / 2.0;
    let timing_skew = truncated_normal(rng, 0.0, spread.timing_std, |t| t.abs() < half);
    let scale = truncated_normal(rng, 1.0, spread.cutoff_rel_std, |s| s > 0.0);
    let filter = spread
        .nominal_cutoff
        .map(|fc| FilterSpec::new(fc * scale))
        .transpose()?;
    Ok(ChannelParams {
        offset,
        gain,
        timing_skew,
        filter,
    })
}

/// Draws all `m` channels, each from its own stream keyed by `seed`.
pub fn draw_all_channels(
    spread: &MismatchSpread,
    m: usize,
    sample_period: f64,
    seed: u64,
) -> Result<Vec<ChannelParams>> {
    (0..m)
        .map(|ch| {
            let mut rng = rng::stream(seed, Purpose::ChannelParams, ch as u64);
            draw_channel_params(spread, sample_period, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(m: usize, bits: u32) -> TiAdcConfig {
        TiAdcConfig::ideal(m, 1.0e6, QuantizerSpec::bipolar(bits).unwrap())
    }

    fn std_dev(v: &[f64]) -> f64 {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    }

    #[test]
    fn nominal_instants() {
        let mut c = cfg(4, 10);
        let ts = c.sample_period();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            sample_instant(&c, ChannelId::Channel(0), 0, &mut rng).unwrap(),
            0.0
        );
        c.channels[2].timing_skew = 0.01 * ts;
        let t = sample_instant(&c, ChannelId::Channel(2), 3, &mut rng).unwrap();
        assert!((t - 14.01 * ts).abs() < 1e-12 * ts);
        c.reference_aligned_to = 3;
        let t = sample_instant(&c, ChannelId::Reference, 2, &mut rng).unwrap();
        assert_eq!(t, 11.0 * ts);
        assert!(matches!(
            sample_instant(&c, ChannelId::Channel(4), 0, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn jitter_statistics() {
        let mut c = cfg(2, 10);
        c.jitter_std = 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let devs: Vec<f64> = (0..100_000)
            .map(|k| {
                let t = sample_instant(&c, ChannelId::Channel(1), k, &mut rng).unwrap();
                t - (2 * k + 1) as f64 * c.sample_period()
            })
            .collect();
        let s = std_dev(&devs);
        assert!((s / c.jitter_std - 1.0).abs() < 0.02, "std {s}");
    }

    #[test]
    fn dc_zero_ideal_is_half_lsb() {
        let c = cfg(4, 10);
        let out = simulate(&c, &SignalSpec::dc(0.0), 16).unwrap();
        let half = c.quantizer.lsb() / 2.0;
        for ch in &out.per_channel {
            assert!(ch.iter().all(|&v| v == half));
        }
        assert!(out.reference.iter().all(|&v| v == half));
        assert_eq!(out.total_saturations(), 0);
    }

    #[test]
    fn offset_lands_on_its_channel() {
        let mut c = cfg(4, 10);
        c.channels[1].offset = 0.1;
        let out = simulate(&c, &SignalSpec::dc(0.0), 8).unwrap();
        let half = c.quantizer.lsb() / 2.0;
        for (m, ch) in out.per_channel.iter().enumerate() {
            let target = if m == 1 { 0.1 } else { 0.0 };
            assert!(ch.iter().all(|&v| (v - target).abs() <= half + 1e-15));
        }
    }

    #[test]
    fn gain_applies_before_offset() {
        let mut c = cfg(2, 16);
        c.channels[0].gain = 2.0;
        c.channels[0].offset = 0.1;
        let out = simulate(&c, &SignalSpec::dc(0.2), 2).unwrap();
        // 2 * 0.2 + 0.1, not 2 * (0.2 + 0.1)
        assert!((out.per_channel[0][0] - 0.5).abs() <= c.quantizer.lsb());
    }

    #[test]
    fn deterministic_with_seed() {
        let mut c = cfg(4, 12);
        c.jitter_std = 1e-9;
        c.rng_seed = 42;
        let s = SignalSpec::sine(0.9, 98_765.0, 0.2).unwrap();
        let a = simulate(&c, &s, 64).unwrap();
        let b = simulate(&c, &s, 64).unwrap();
        assert_eq!(a, b);
        c.rng_seed = 43;
        assert_ne!(a, simulate(&c, &s, 64).unwrap());
    }

    #[test]
    fn zero_mismatch_matches_uniform_sampling() {
        let mut c = cfg(4, 10);
        let filter = FilterSpec::new(5.0e6).unwrap();
        for ch in &mut c.channels {
            ch.filter = Some(filter);
        }
        let s = SignalSpec::sine(0.95, 98_632.812_5, 0.4).unwrap();
        let out = simulate(&c, &s, 64).unwrap();
        let filtered = s.filtered(&filter);
        let direct: Vec<f64> = (0..256)
            .map(|n| {
                c.quantizer
                    .quantize(filtered.eval(n as f64 * c.sample_period()))
                    .value
            })
            .collect();
        assert_eq!(interleave(&out), direct);
    }

    #[test]
    fn reference_matches_ideal_channel() {
        let mut c = cfg(4, 12);
        c.channels[2].gain = 1.05;
        c.channels[2].timing_skew = 0.02 * c.sample_period();
        c.reference_aligned_to = 2;
        let s = SignalSpec::sine(0.8, 123_456.0, 0.0).unwrap();
        let out = simulate(&c, &s, 32).unwrap();
        let ideal: Vec<f64> = (0..32)
            .map(|k| {
                c.quantizer
                    .quantize(s.eval((4 * k + 2) as f64 * c.sample_period()))
                    .value
            })
            .collect();
        assert_eq!(out.reference, ideal);
        assert_eq!(simulate_reference(&c, &s, 32, 2).unwrap(), ideal);
        // moving the reference clock leaves channel streams alone
        let mut moved = c.clone();
        moved.reference_aligned_to = 1;
        assert_eq!(
            simulate(&moved, &s, 32).unwrap().per_channel,
            out.per_channel
        );
    }

    #[test]
    fn saturation_accounting() {
        let mut c = cfg(2, 8);
        c.channels[1].gain = 1.5;
        let s = SignalSpec::sine(0.9, 10_000.0, 0.0).unwrap();
        let k = 200;
        let out = simulate(&c, &s, k).unwrap();
        for m in 0..2 {
            let expected = (0..k)
                .filter(|&kk| {
                    let t = (2 * kk + m) as f64 * c.sample_period();
                    let v = c.channels[m].gain * s.eval(t);
                    !(-1.0..=1.0).contains(&v)
                })
                .count();
            assert_eq!(out.saturations[m], expected);
        }
        assert_eq!(out.saturations[0], 0);
        assert!(out.saturations[1] > 0);
    }

    #[test]
    fn interleave_examples() {
        let streams = vec![vec![1, 3], vec![2, 4]];
        assert_eq!(interleave_streams(&streams), vec![1, 2, 3, 4]);
        assert_eq!(interleave_streams(&[vec![5, 6, 7]]), vec![5, 6, 7]);
        assert_eq!(deinterleave(&[1, 2, 3, 4], 2), streams);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(4, 8);
        assert!(c.validate().is_ok());
        c.channels.pop();
        assert!(c.validate().is_err());
        let mut c = cfg(4, 8);
        c.channels[0].gain = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg(4, 8);
        c.channels[0].timing_skew = c.sample_period();
        assert!(c.validate().is_err());
        let mut c = cfg(4, 8);
        c.reference_aligned_to = 4;
        assert!(c.validate().is_err());
        assert!(cfg(1, 8).validate().is_err());
        assert!(simulate(&cfg(2, 8), &SignalSpec::dc(0.0), 0).is_err());
    }

    #[test]
    fn zero_spread_is_nominal() {
        let spread = MismatchSpread {
            nominal_cutoff: Some(5.0e6),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = draw_channel_params(&spread, 1e-6, &mut rng).unwrap();
        assert_eq!(p.offset, 0.0);
        assert_eq!(p.gain, 1.0);
        assert_eq!(p.timing_skew, 0.0);
        assert_eq!(p.filter.unwrap().cutoff(), 5.0e6);
    }

    #[test]
    fn gain_draw_statistics() {
        let spread = MismatchSpread {
            gain_std: 0.01,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gains: Vec<f64> = (0..100_000)
            .map(|_| draw_channel_params(&spread, 1e-6, &mut rng).unwrap().gain)
            .collect();
        let s = std_dev(&gains);
        assert!((s / 0.01 - 1.0).abs() < 0.02, "std {s}");
    }

    #[test]
    fn cutoff_ensemble() {
        let fs = 1.0e6;
        let spread = MismatchSpread {
            cutoff_rel_std: 0.1,
            nominal_cutoff: Some(5.0 * fs),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rel: Vec<f64> = (0..20_000)
            .map(|_| {
                let p = draw_channel_params(&spread, 1.0 / fs, &mut rng).unwrap();
                p.filter.unwrap().cutoff() / (5.0 * fs)
            })
            .collect();
        let mean = rel.iter().sum::<f64>() / rel.len() as f64;
        assert!((mean - 1.0).abs() < 0.005);
        assert!((std_dev(&rel) / 0.1 - 1.0).abs() < 0.03);
    }

    #[test]
    fn timing_draws_truncated() {
        let spread = MismatchSpread {
            timing_std: 1.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p = draw_channel_params(&spread, 1.0, &mut rng).unwrap();
            assert!(p.timing_skew.abs() < 0.5);
        }
    }
}
