use num_complex::Complex64;
use rustfft::FftPlanner;

use super::RadarConfig;
use crate::error::Result;

/// Unit-peak raised-cosine magnitude at baseband offset `f` (Hz).
pub fn raised_cosine_response(f: f64, bandwidth: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    let inner = (1.0 - rolloff) * bandwidth / 2.0;
    let outer = (1.0 + rolloff) * bandwidth / 2.0;
    if f <= inner {
        1.0
    } else if f < outer {
        0.5 * (1.0 + (std::f64::consts::PI / (rolloff * bandwidth) * (f - inner)).cos())
    } else {
        0.0
    }
}

/// Baseband frequencies of the `N`-point DFT grid, negative half wrapped.
pub fn frequency_grid(cfg: &RadarConfig) -> Vec<f64> {
    let n = cfg.n_fast;
    let df = 1.0 / (n as f64 * cfg.t_ft);
    (0..n)
        .map(|k| {
            let signed = if 2 * k < n { k as f64 } else { k as f64 - n as f64 };
            signed * df
        })
        .collect()
}

/// Raised-cosine response sampled on [`frequency_grid`].
pub fn pulse_spectrum(cfg: &RadarConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok(frequency_grid(cfg)
        .into_iter()
        .map(|f| raised_cosine_response(f, cfg.bandwidth, cfg.rolloff))
        .collect())
}

/// Time-domain baseband pulse `s(n T_ft)`, peak at index 0, circularly wrapped.
pub fn raised_cosine_pulse(cfg: &RadarConfig) -> Result<Vec<Complex64>> {
    let spectrum = pulse_spectrum(cfg)?;
    let n = spectrum.len();
    let mut buf: Vec<Complex64> = spectrum.iter().map(|&h| Complex64::new(h, 0.0)).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passband_peak_and_stopband() {
        let cfg = RadarConfig::default();
        assert_eq!(raised_cosine_response(0.0, cfg.bandwidth, cfg.rolloff), 1.0);
        assert_eq!(cfg.band_edge(), 375e6);
        for f in [375e6, 376e6, 500e6, -375e6, -900e6] {
            assert_eq!(raised_cosine_response(f, cfg.bandwidth, cfg.rolloff), 0.0);
        }
        // half-amplitude point at B/2
        let mid = raised_cosine_response(250e6, cfg.bandwidth, cfg.rolloff);
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pulse_energy_matches_discrete_parseval() {
        let cfg = RadarConfig::default();
        let spectrum = pulse_spectrum(&cfg).unwrap();
        let pulse = raised_cosine_pulse(&cfg).unwrap();
        let time_energy: f64 = pulse.iter().map(|z| z.norm_sqr()).sum();
        // Parseval oracle evaluated directly from the spectrum samples.
        let freq_energy: f64 =
            spectrum.iter().map(|h| h * h).sum::<f64>() / cfg.n_fast as f64;
        assert!((time_energy - freq_energy).abs() < 1e-12 * freq_energy);
    }

    #[test]
    fn pulse_peaks_at_index_zero() {
        let pulse = raised_cosine_pulse(&RadarConfig::default()).unwrap();
        let (argmax, _) = pulse
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        assert_eq!(argmax, 0);
        // real and symmetric spectrum gives a real, even pulse
        assert!(pulse.iter().all(|z| z.im.abs() < 1e-12));
        assert!((pulse[1].re - pulse[63].re).abs() < 1e-12);
    }

    #[test]
    fn nyquist_violation_is_rejected() {
        let cfg = RadarConfig {
            t_ft: 2e-9,
            ..RadarConfig::default()
        };
        assert!(raised_cosine_pulse(&cfg).is_err());
    }

    #[test]
    fn wideband_variant_is_valid() {
        RadarConfig::wideband().validate().unwrap();
    }
}
