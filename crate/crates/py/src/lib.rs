//! Python bindings for the `tiadc` simulator.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::tiadc as core;
use core::experiment;

fn to_py(err: core::Error) -> PyErr {
    if err.is_estimator_failure() || matches!(err, core::Error::Io(_)) {
        PyRuntimeError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn parse_window(name: &str) -> PyResult<core::Window> {
    match name.to_ascii_uppercase().as_str() {
        "RECTANGULAR" => Ok(core::Window::Rectangular),
        "HANN" => Ok(core::Window::Hann),
        other => Err(PyValueError::new_err(format!("unknown window {other:?}"))),
    }
}

#[pyclass(name = "Signal", module = "tiadc", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySignal {
    inner: core::SignalSpec,
}

#[pymethods]
impl PySignal {
    /// `tones` is a list of `(amplitude_v, frequency_hz, phase_rad)`.
    #[new]
    #[pyo3(signature = (tones, dc=0.0))]
    fn new(tones: Vec<(f64, f64, f64)>, dc: f64) -> PyResult<Self> {
        let tones = tones
            .into_iter()
            .map(|(a, f, p)| core::Tone::new(a, f, p))
            .collect::<core::Result<Vec<_>>>()
            .map_err(to_py)?;
        Ok(Self {
            inner: core::SignalSpec::new(tones, dc),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (amplitude, frequency, phase=0.0))]
    fn sine(amplitude: f64, frequency: f64, phase: f64) -> PyResult<Self> {
        Self::new(vec![(amplitude, frequency, phase)], 0.0)
    }

    fn eval(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }
}

#[pyclass(name = "Quantizer", module = "tiadc", frozen, skip_from_py_object)]
pub struct PyQuantizer {
    inner: core::QuantizerSpec,
}

#[pymethods]
impl PyQuantizer {
    #[new]
    #[pyo3(signature = (bits, v_min=-1.0, v_max=1.0))]
    fn new(bits: u32, v_min: f64, v_max: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::QuantizerSpec::new(bits, v_min, v_max).map_err(to_py)?,
        })
    }

    #[getter]
    fn lsb(&self) -> f64 {
        self.inner.lsb()
    }

    /// Returns `(code, reconstructed_value, saturated)`.
    fn quantize(&self, v: f64) -> (u32, f64, bool) {
        let q = self.inner.quantize(v);
        (q.code, q.value, q.saturated)
    }
}

#[pyclass(name = "TiAdc", module = "tiadc", skip_from_py_object)]
#[derive(Clone)]
pub struct PyTiAdc {
    inner: core::TiAdcConfig,
}

#[pymethods]
impl PyTiAdc {
    #[new]
    #[pyo3(signature = (m_channels, sample_rate, bits=8, v_min=-1.0, v_max=1.0, jitter_std=0.0, seed=0))]
    fn new(
        m_channels: usize,
        sample_rate: f64,
        bits: u32,
        v_min: f64,
        v_max: f64,
        jitter_std: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let q = core::QuantizerSpec::new(bits, v_min, v_max).map_err(to_py)?;
        let mut inner = core::TiAdcConfig::ideal(m_channels, sample_rate, q);
        inner.jitter_std = jitter_std;
        inner.rng_seed = seed;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn m_channels(&self) -> usize {
        self.inner.m_channels
    }

    #[getter]
    fn sample_rate(&self) -> f64 {
        self.inner.sample_rate
    }

    /// Sets channel `m`; `timing_skew` is in seconds.
    #[pyo3(signature = (m, offset=0.0, gain=1.0, timing_skew=0.0, cutoff=None))]
    fn set_channel(
        &mut self,
        m: usize,
        offset: f64,
        gain: f64,
        timing_skew: f64,
        cutoff: Option<f64>,
    ) -> PyResult<()> {
        let filter = cutoff
            .map(core::FilterSpec::new)
            .transpose()
            .map_err(to_py)?;
        let mut next = self.inner.clone();
        let slot = next
            .channels
            .get_mut(m)
            .ok_or_else(|| PyValueError::new_err(format!("no channel {m}")))?;
        *slot = core::ChannelParams {
            offset,
            gain,
            timing_skew,
            filter,
        };
        next.validate().map_err(to_py)?;
        self.inner = next;
        Ok(())
    }

    /// Draws every channel from a random spread; `timing_std` is in seconds.
    #[pyo3(signature = (seed, offset_std=0.0, gain_std=0.0, timing_std=0.0, cutoff_rel_std=0.0, nominal_cutoff=None))]
    fn draw_mismatch(
        &mut self,
        seed: u64,
        offset_std: f64,
        gain_std: f64,
        timing_std: f64,
        cutoff_rel_std: f64,
        nominal_cutoff: Option<f64>,
    ) -> PyResult<()> {
        let spread = core::MismatchSpread {
            offset_std,
            gain_std,
            timing_std,
            cutoff_rel_std,
            nominal_cutoff,
        };
        let ts = self.inner.sample_period();
        self.inner.channels =
            core::draw_all_channels(&spread, self.inner.m_channels, ts, seed).map_err(to_py)?;
        Ok(())
    }

    /// `(offset, gain, timing_skew_s, cutoff_hz)` per channel.
    fn channels(&self) -> Vec<(f64, f64, f64, Option<f64>)> {
        self.inner
            .channels
            .iter()
            .map(|c| {
                (
                    c.offset,
                    c.gain,
                    c.timing_skew,
                    c.filter.map(|f| f.cutoff()),
                )
            })
            .collect()
    }

    fn simulate(&self, signal: &PySignal, k_frames: usize) -> PyResult<PyOutputs> {
        let out = core::simulate(&self.inner, &signal.inner, k_frames).map_err(to_py)?;
        Ok(PyOutputs {
            inner: out,
            adc: self.inner.clone(),
            signal: signal.inner.clone(),
        })
    }
}

#[pyclass(name = "ChannelOutputs", module = "tiadc", frozen, skip_from_py_object)]
pub struct PyOutputs {
    inner: core::ChannelOutputs,
    adc: core::TiAdcConfig,
    signal: core::SignalSpec,
}

#[pymethods]
impl PyOutputs {
    #[getter]
    fn per_channel(&self) -> Vec<Vec<f64>> {
        self.inner.per_channel.clone()
    }

    #[getter]
    fn reference(&self) -> Vec<f64> {
        self.inner.reference.clone()
    }

    #[getter]
    fn codes(&self) -> Vec<Vec<u32>> {
        self.inner.codes.clone()
    }

    #[getter]
    fn k_frames(&self) -> usize {
        self.inner.k_frames
    }

    #[getter]
    fn saturations(&self) -> Vec<usize> {
        self.inner.saturations.clone()
    }

    fn interleaved(&self) -> Vec<f64> {
        self.inner.interleaved()
    }

    /// Identifies every channel against re-aligned reference captures.
    #[pyo3(signature = (signed_differences=false))]
    fn identify(&self, signed_differences: bool) -> PyResult<PyEstimate> {
        let opts = core::IdentifyOptions {
            difference_mode: if signed_differences {
                core::DifferenceMode::Signed
            } else {
                core::DifferenceMode::Absolute
            },
        };
        let k = self.inner.k_frames;
        let est = core::estimate_all_with(
            &self.inner,
            &self.adc,
            |m| core::simulate_reference(&self.adc, &self.signal, k, m),
            &opts,
        )
        .map_err(to_py)?;
        Ok(PyEstimate { inner: est })
    }

    /// Corrected interleaved stream and the transient length at each end.
    #[pyo3(signature = (estimate, taps=32))]
    fn calibrate(&self, estimate: &PyEstimate, taps: usize) -> PyResult<(Vec<f64>, usize)> {
        let c = core::calibrate(&self.inner, &estimate.inner, taps).map_err(to_py)?;
        Ok((c.samples, c.transient))
    }
}

#[pyclass(
    name = "MismatchEstimate",
    module = "tiadc",
    frozen,
    skip_from_py_object
)]
pub struct PyEstimate {
    inner: core::MismatchEstimate,
}

#[pymethods]
impl PyEstimate {
    #[new]
    fn new(offsets: Vec<f64>, gains: Vec<f64>, rel_timing: Vec<f64>, k_used: usize) -> Self {
        Self {
            inner: core::MismatchEstimate {
                offsets_v: offsets,
                gains,
                rel_timing,
                k_used,
            },
        }
    }

    #[getter]
    fn offsets(&self) -> Vec<f64> {
        self.inner.offsets_v.clone()
    }

    #[getter]
    fn gains(&self) -> Vec<f64> {
        self.inner.gains.clone()
    }

    /// Skew of each channel relative to the reference, in units of `T_s`.
    #[getter]
    fn rel_timing(&self) -> Vec<f64> {
        self.inner.rel_timing.clone()
    }

    #[getter]
    fn k_used(&self) -> usize {
        self.inner.k_used
    }
}

#[pyclass(name = "SpectrumReport", module = "tiadc", frozen, skip_from_py_object)]
pub struct PyReport {
    inner: core::SpectrumReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn sinad_db(&self) -> f64 {
        self.inner.sinad_db
    }

    #[getter]
    fn sfdr_db(&self) -> f64 {
        self.inner.sfdr_db
    }

    #[getter]
    fn enob_bits(&self) -> f64 {
        self.inner.enob_bits
    }

    #[getter]
    fn noise_floor_dbc(&self) -> f64 {
        self.inner.noise_floor_dbc
    }

    #[getter]
    fn carrier_freq_hz(&self) -> f64 {
        self.inner.carrier_freq_hz
    }

    #[getter]
    fn bin_freqs(&self) -> Vec<f64> {
        self.inner.bin_freqs.clone()
    }

    #[getter]
    fn power_dbc(&self) -> Vec<f64> {
        self.inner.power_dbc.clone()
    }

    /// `(freq_hz, power_dbc, label)` for every above-floor spur.
    #[getter]
    fn spurs(&self) -> Vec<(f64, f64, String)> {
        self.inner
            .spurs
            .iter()
            .map(|s| {
                let label = serde_json::to_value(s.label)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default();
                (s.freq_hz, s.power_dbc, label)
            })
            .collect()
    }

    /// Share of spur power with `label` (`OFFSET_SPUR`, `SIGNAL_IMAGE_SPUR`
    /// or `UNCLASSIFIED`).
    fn spur_fraction(&self, label: &str) -> PyResult<f64> {
        let label: core::SpurLabel = serde_json::from_value(serde_json::Value::from(label))
            .map_err(|_| PyValueError::new_err(format!("unknown spur label {label:?}")))?;
        Ok(self.inner.spur_fraction(label))
    }
}

/// Spectrum and figures of merit of `x`; spurs are labelled when
/// `m_channels` is given.
#[pyfunction]
#[pyo3(signature = (x, sample_rate, carrier_hint=None, window="RECTANGULAR", m_channels=None))]
fn analyze(
    x: Vec<f64>,
    sample_rate: f64,
    carrier_hint: Option<f64>,
    window: &str,
    m_channels: Option<usize>,
) -> PyResult<PyReport> {
    let opts = core::AnalysisOptions {
        window: parse_window(window)?,
        carrier_hint,
        ..Default::default()
    };
    let mut report = core::analyze_with(&x, sample_rate, &opts).map_err(to_py)?;
    if let Some(m) = m_channels {
        let pred = core::predict_spurs(m, report.carrier_freq_hz, sample_rate).map_err(to_py)?;
        report = core::label_spurs(&report, &pred, 1);
    }
    Ok(PyReport { inner: report })
}

/// `(offset_spur_freqs, image_spur_freqs)`.
#[pyfunction]
fn predict_spurs(m_channels: usize, f0: f64, sample_rate: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = core::predict_spurs(m_channels, f0, sample_rate).map_err(to_py)?;
    Ok((p.offset, p.image))
}

#[pyfunction]
fn estimate_offset(y_m: Vec<f64>, y_ref: Vec<f64>) -> PyResult<f64> {
    core::estimate_offset(&y_m, &y_ref).map_err(to_py)
}

#[pyfunction]
fn estimate_gain(y_m: Vec<f64>, y_ref: Vec<f64>) -> PyResult<f64> {
    core::estimate_gain(&y_m, &y_ref).map_err(to_py)
}

#[pyfunction]
fn estimate_timing(y_m: Vec<f64>, y_prev: Vec<f64>, y_ref: Vec<f64>) -> PyResult<f64> {
    core::estimate_timing(&y_m, &y_prev, &y_ref).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (y, r, taps=32))]
fn compensate_timing(y: Vec<f64>, r: f64, taps: usize) -> PyResult<Vec<f64>> {
    Ok(core::compensate_timing(&y, r, taps).map_err(to_py)?.samples)
}

/// Normalized configuration JSON; raises `ValueError` listing every issue.
#[pyfunction]
fn validate_config(text: &str) -> PyResult<String> {
    experiment::validate(text)
        .map(|c| c.to_json())
        .map_err(|issues| {
            let lines: Vec<String> = issues.iter().map(ToString::to_string).collect();
            PyValueError::new_err(lines.join("\n"))
        })
}

#[pyfunction]
fn config_schema() -> String {
    experiment::schema()
}

/// Runs a configuration and returns `report.json`; also writes all
/// artifacts when `out_dir` is given.
#[pyfunction]
#[pyo3(signature = (config_json, out_dir=None, seed=None))]
fn run_experiment(
    py: Python<'_>,
    config_json: &str,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
) -> PyResult<String> {
    let mut cfg = experiment::validate(config_json).map_err(|issues| {
        let lines: Vec<String> = issues.iter().map(ToString::to_string).collect();
        PyValueError::new_err(lines.join("\n"))
    })?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(dir) = &out_dir {
        cfg.output_dir = dir.to_string_lossy().into_owned();
    }
    let artifacts = py
        .detach(|| experiment::execute(&cfg).map(|r| experiment::render(&r)))
        .map_err(to_py)?;
    if let Some(dir) = out_dir {
        artifacts
            .write_to(&dir)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    }
    Ok(artifacts.report_json)
}

#[pymodule]
#[pyo3(name = "tiadc")]
fn tiadc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignal>()?;
    m.add_class::<PyQuantizer>()?;
    m.add_class::<PyTiAdc>()?;
    m.add_class::<PyOutputs>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(predict_spurs, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_offset, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gain, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_timing, m)?)?;
    m.add_function(wrap_pyfunction!(compensate_timing, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(config_schema, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
