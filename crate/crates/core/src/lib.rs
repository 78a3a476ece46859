//! Behavioral simulation of time-interleaved ADCs with a reference channel.
//!
//! The crate covers the converter model ([`adc`]), spectral figures of merit
//! ([`spectrum`]), reference-channel mismatch identification ([`identify`]),
//! digital correction ([`calibrate`]), and a config-driven experiment runner
//! ([`experiment`]).

// `!(x < y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adc;
pub mod calibrate;
pub mod error;
pub mod experiment;
pub mod identify;
pub mod quantizer;
pub mod rng;
pub mod signal;
pub mod spectrum;

pub use adc::{
    deinterleave, draw_all_channels, draw_channel_params, interleave, interleave_streams,
    sample_instant, simulate, simulate_reference, ChannelId, ChannelOutputs, ChannelParams,
    MismatchSpread, TiAdcConfig,
};
pub use calibrate::{
    calibrate, calibrate_with, calibration_transient, compensate_gain, compensate_offset,
    compensate_timing, Compensated, FractionalDelay, Stages,
};
pub use error::{Error, Result};
pub use identify::{
    estimate_all, estimate_all_with, estimate_gain, estimate_offset, estimate_timing,
    estimate_timing_with, DifferenceMode, IdentifyOptions, MismatchEstimate,
};
pub use quantizer::{quantize, Quantized, QuantizerSpec};
pub use signal::{apply_filter, eval_signal, FilterSpec, SignalSpec, Tone};
pub use spectrum::{
    analyze, analyze_with, label_spurs, power_spectrum, predict_spurs, AnalysisOptions, Spectrum,
    SpectrumReport, Spur, SpurLabel, SpurPrediction, Window,
};
