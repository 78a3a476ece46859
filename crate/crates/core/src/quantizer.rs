//! Uniform mid-rise quantizer with clipping.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizerSpec {
    bits: u32,
    v_min: f64,
    v_max: f64,
}

/// One quantized sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantized {
    pub code: u32,
    pub value: f64,
    /// Input was outside `[v_min, v_max]`.
    pub saturated: bool,
}

impl QuantizerSpec {
    pub const MAX_BITS: u32 = 31;

    pub fn new(bits: u32, v_min: f64, v_max: f64) -> Result<Self> {
        if !(1..=Self::MAX_BITS).contains(&bits) {
            return Err(Error::Config(format!(
                "quantizer bits must be in 1..={}, got {bits}",
                Self::MAX_BITS
            )));
        }
        if !(v_min.is_finite() && v_max.is_finite() && v_max > v_min) {
            return Err(Error::Config(format!(
                "quantizer range must satisfy v_min < v_max, got [{v_min}, {v_max}]"
            )));
        }
        Ok(Self { bits, v_min, v_max })
    }

    /// `bits`-bit converter over [-1, 1] V.
    pub fn bipolar(bits: u32) -> Result<Self> {
        Self::new(bits, -1.0, 1.0)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn levels(&self) -> u64 {
        1u64 << self.bits
    }

    pub fn max_code(&self) -> u32 {
        (self.levels() - 1) as u32
    }

    pub fn lsb(&self) -> f64 {
        (self.v_max - self.v_min) / self.levels() as f64
    }

    pub fn full_scale(&self) -> f64 {
        self.v_max - self.v_min
    }

    pub fn reconstruct(&self, code: u32) -> f64 {
        self.v_min + (f64::from(code.min(self.max_code())) + 0.5) * self.lsb()
    }

    pub fn quantize(&self, v: f64) -> Quantized {
        let raw = ((v - self.v_min) / self.lsb()).floor();
        let code = raw.clamp(0.0, f64::from(self.max_code())) as u32;
        Quantized {
            code,
            value: self.reconstruct(code),
            saturated: v < self.v_min || v > self.v_max,
        }
    }
}

/// Returns `(code, reconstructed)`.
pub fn quantize(q: &QuantizerSpec, v: f64) -> (u32, f64) {
    let out = q.quantize(v);
    (out.code, out.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eight_bit_examples() {
        let q = QuantizerSpec::bipolar(8).unwrap();
        assert_eq!(q.lsb(), 0.0078125);
        assert_eq!(quantize(&q, -1.0), (0, -0.99609375));
        assert_eq!(quantize(&q, 2.0), (255, 0.99609375));
        assert!(q.quantize(2.0).saturated);
        assert_eq!(quantize(&q, 0.5), (192, 0.50390625));
        assert!(!q.quantize(0.5).saturated);
        // upper rail maps to the top code without counting as saturation
        assert_eq!(q.quantize(1.0).code, 255);
        assert!(!q.quantize(1.0).saturated);
        assert_eq!(quantize(&q, -3.0), (0, -0.99609375));
    }

    #[test]
    fn zero_is_a_decision_boundary() {
        let q = QuantizerSpec::bipolar(10).unwrap();
        let out = q.quantize(0.0);
        assert_eq!(out.code, 512);
        assert_eq!(out.value, q.lsb() / 2.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(QuantizerSpec::new(0, -1.0, 1.0).is_err());
        assert!(QuantizerSpec::new(32, -1.0, 1.0).is_err());
        assert!(QuantizerSpec::new(8, 1.0, 1.0).is_err());
        assert!(QuantizerSpec::new(8, 1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn error_bounded_inside_range(bits in 1u32..20, v in -1.0f64..1.0) {
            let q = QuantizerSpec::bipolar(bits).unwrap();
            let out = q.quantize(v);
            prop_assert!(out.code <= q.max_code());
            prop_assert!((out.value - v).abs() <= q.lsb() / 2.0 + 1e-15);
            prop_assert!(out.value >= q.v_min() + q.lsb() / 2.0 - 1e-15);
            prop_assert!(out.value <= q.v_max() - q.lsb() / 2.0 + 1e-15);
        }

        #[test]
        fn monotone(bits in 1u32..16, a in -2.0f64..2.0, d in 0.0f64..1.0) {
            let q = QuantizerSpec::bipolar(bits).unwrap();
            prop_assert!(q.quantize(a + d).code >= q.quantize(a).code);
        }
    }
}
