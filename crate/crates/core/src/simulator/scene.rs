use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::motion::{motion_trajectory, MotionModel, MotionState};
use super::pulse::{frequency_grid, pulse_spectrum};
use super::RadarConfig;
use crate::error::{Error, Result};
use crate::radar::{CirMatrix, ComplexMatrix};

/// One discrete propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    pub amplitude: Complex64,
    /// Nominal delay in seconds.
    pub delay: f64,
    pub is_target: bool,
}

impl PathComponent {
    pub fn clutter(amplitude: Complex64, delay: f64) -> Self {
        Self {
            amplitude,
            delay,
            is_target: false,
        }
    }

    pub fn target(amplitude: Complex64, delay: f64) -> Self {
        Self {
            amplitude,
            delay,
            is_target: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scene {
    pub target_paths: Vec<(PathComponent, MotionModel)>,
    pub clutter_paths: Vec<PathComponent>,
    /// Standard deviation of the real and of the imaginary part of the
    /// receiver noise, per sample.
    pub noise_sigma: f64,
}

impl Scene {
    pub fn path_count(&self) -> usize {
        self.target_paths.len() + self.clutter_paths.len()
    }

    pub fn validate(&self, cfg: &RadarConfig) -> Result<()> {
        if self.path_count() == 0 {
            return Err(Error::Config("scene needs at least one path".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("bad noise sigma {}", self.noise_sigma)));
        }
        let window = cfg.window();
        let paths = self
            .clutter_paths
            .iter()
            .chain(self.target_paths.iter().map(|(p, _)| p));
        for p in paths {
            if !(p.amplitude.re.is_finite() && p.amplitude.im.is_finite()) {
                return Err(Error::Config("path amplitude must be finite".into()));
            }
            check_delay(p.delay, window)?;
        }
        for (_, motion) in &self.target_paths {
            motion.validate()?;
        }
        Ok(())
    }

    /// Union of the paths of two scenes; noise of `self` is kept.
    pub fn merged(&self, other: &Scene) -> Scene {
        let mut out = self.clone();
        out.target_paths.extend(other.target_paths.iter().cloned());
        out.clutter_paths.extend(other.clutter_paths.iter().cloned());
        out
    }
}

fn check_delay(delay: f64, window: f64) -> Result<()> {
    if !(0.0..window).contains(&delay) {
        return Err(Error::DelayOutOfWindow {
            delay_s: delay,
            window_s: window,
        });
    }
    Ok(())
}

/// Renders a scene into an `N x M` received matrix.
///
/// Every path contributes `α e^{-j2π f_c τ} s(n T_ft - τ)`; the delayed pulse
/// is built in the frequency domain as `H(f) e^{-j2π f τ}`, so fractional
/// delays are exact (circular) for the band-limited pulse. Target paths
/// follow their motion trajectory; trajectories are drawn from `rng` in
/// path order, then the receiver noise.
pub fn simulate_received<R: Rng + ?Sized>(
    scene: &Scene,
    cfg: &RadarConfig,
    rng: &mut R,
) -> Result<CirMatrix> {
    cfg.validate()?;
    scene.validate(cfg)?;
    let (n, m) = (cfg.n_fast, cfg.m_slow);
    let window = cfg.window();
    let spectrum = pulse_spectrum(cfg)?;
    let freqs = frequency_grid(cfg);

    let trajectories: Vec<Vec<MotionState>> = scene
        .target_paths
        .iter()
        .map(|(_, model)| motion_trajectory(model, m, cfg.t_st, rng))
        .collect();

    let mut static_spec = vec![Complex64::new(0.0, 0.0); n];
    for p in &scene.clutter_paths {
        accumulate_path(&mut static_spec, &spectrum, &freqs, cfg.f_c, p.amplitude, p.delay);
    }

    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let inv_n = 1.0 / n as f64;
    let mut out = ComplexMatrix::zeros(n, m);
    for col in 0..m {
        let mut spec = static_spec.clone();
        for ((path, _), traj) in scene.target_paths.iter().zip(&trajectories) {
            let st = traj[col];
            let delay = path.delay + st.delay_offset;
            check_delay(delay, window)?;
            accumulate_path(&mut spec, &spectrum, &freqs, cfg.f_c, path.amplitude * st.amp_factor, delay);
        }
        ifft.process(&mut spec);
        for (dst, z) in out.column_mut(col).iter_mut().zip(&spec) {
            *dst = z * inv_n;
        }
    }

    if scene.noise_sigma > 0.0 {
        for z in out.as_mut_slice() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z += Complex64::new(re, im) * scene.noise_sigma;
        }
    }
    CirMatrix::new(out, cfg.t_ft, cfg.t_st)
}

fn accumulate_path(
    spec: &mut [Complex64],
    pulse: &[f64],
    freqs: &[f64],
    f_c: f64,
    amplitude: Complex64,
    delay: f64,
) {
    let alpha = amplitude * Complex64::from_polar(1.0, -TAU * f_c * delay);
    for ((acc, &h), &f) in spec.iter_mut().zip(pulse).zip(freqs) {
        if h != 0.0 {
            *acc += alpha * h * Complex64::from_polar(1.0, -TAU * f * delay);
        }
    }
}
