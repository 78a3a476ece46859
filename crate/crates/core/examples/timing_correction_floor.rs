//! SINAD left after correcting known skews on a nearly unquantized record,
//! for a few interpolator lengths and tone frequencies.
//!
//!     cargo run --release --example timing_correction_floor

use tiadc::spectrum::coherent_frequency;
use tiadc::{
    analyze, calibrate, calibration_transient, simulate, MismatchEstimate, QuantizerSpec,
    SignalSpec, TiAdcConfig, Tone,
};

fn main() -> tiadc::Result<()> {
    let fs = 1.0e6;
    let skews = [0.0, 0.01, -0.015, 0.005];
    println!("taps  f0/fs   SINAD dB");
    for half in [16, 32, 64] {
        let guard = calibration_transient(half).div_ceil(4);
        for bin in [101, 405, 1001, 1601] {
            let signal = SignalSpec::new(
                vec![Tone::new(0.9, coherent_frequency(bin, 4096, fs), 0.5)?],
                0.0,
            );
            let mut cfg = TiAdcConfig::ideal(4, fs, QuantizerSpec::bipolar(24)?);
            for (ch, r) in cfg.channels.iter_mut().zip(skews) {
                ch.timing_skew = r / fs;
            }
            let k = 1024 + 2 * guard;
            let out = simulate(&cfg, &signal, k)?;
            let mut est = MismatchEstimate::identity(4, k);
            est.rel_timing = skews.to_vec();
            let fixed = calibrate(&out, &est, half)?;
            let start = 4 * guard;
            let sinad = analyze(&fixed.samples[start..start + 4096], fs, None)?.sinad_db;
            println!("{half:>4}  {:.3}  {sinad:>8.1}", bin as f64 / 4096.0);
        }
    }
    Ok(())
}
