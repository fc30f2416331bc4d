//! Slow-time trajectories of target paths.
//!
//! None of these are measured; they are surrogate models whose magnitudes
//! only respect the ordering breathing < talking < moving.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radar::ActivityLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Breathing,
    Talking,
    Moving,
}

impl MotionKind {
    pub fn from_label(label: ActivityLabel) -> Option<Self> {
        match label {
            ActivityLabel::Breathing => Some(MotionKind::Breathing),
            ActivityLabel::Talking => Some(MotionKind::Talking),
            ActivityLabel::Moving => Some(MotionKind::Moving),
            ActivityLabel::Empty => None,
        }
    }
}

impl fmt::Display for MotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MotionKind::Breathing => "breathing",
            MotionKind::Talking => "talking",
            MotionKind::Moving => "moving",
        })
    }
}

impl FromStr for MotionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let label: ActivityLabel = s.parse()?;
        MotionKind::from_label(label)
            .ok_or_else(|| Error::Parse("\"empty\" is not a motion kind".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionModel {
    pub kind: MotionKind,
    /// Fundamental rate in Hz.
    pub rate: f64,
    /// Peak delay deviation in seconds.
    pub delay_excursion: f64,
    /// Peak relative amplitude deviation.
    pub amp_excursion: f64,
    /// Scale of the random perturbations; zero gives a pure sinusoid for
    /// breathing.
    pub jitter: f64,
    /// Initial phase in radians.
    #[serde(default)]
    pub phase: f64,
}

/// 33 ps of delay is roughly 5 mm of two-way chest displacement.
pub const BREATHING_DELAY_EXCURSION: f64 = 33e-12;

impl MotionModel {
    pub fn default_for(kind: MotionKind) -> Self {
        match kind {
            MotionKind::Breathing => Self {
                kind,
                rate: 0.25,
                delay_excursion: BREATHING_DELAY_EXCURSION,
                amp_excursion: 0.1,
                jitter: 0.0,
                phase: 0.0,
            },
            MotionKind::Talking => Self {
                kind,
                rate: 0.3,
                delay_excursion: 2.0 * BREATHING_DELAY_EXCURSION,
                amp_excursion: 0.2,
                jitter: 0.3,
                phase: 0.0,
            },
            MotionKind::Moving => Self {
                kind,
                rate: 0.5,
                delay_excursion: 10.0 * BREATHING_DELAY_EXCURSION,
                amp_excursion: 0.5,
                jitter: 1.0,
                phase: 0.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0) {
            return Err(Error::Config(format!("motion rate must be positive, got {}", self.rate)));
        }
        if !(self.delay_excursion >= 0.0 && self.amp_excursion >= 0.0 && self.jitter >= 0.0) {
            return Err(Error::Config("motion excursions and jitter must be non-negative".into()));
        }
        Ok(())
    }
}

/// Deviation of one path from its nominal delay and amplitude at one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub delay_offset: f64,
    pub amp_factor: Complex64,
}

impl MotionState {
    pub const STILL: MotionState = MotionState {
        delay_offset: 0.0,
        amp_factor: Complex64 { re: 1.0, im: 0.0 },
    };
}

/// Trajectory over `m_slow` repetitions spaced `t_st` apart. Deterministic
/// for a given random-source state.
pub fn motion_trajectory<R: Rng + ?Sized>(
    model: &MotionModel,
    m_slow: usize,
    t_st: f64,
    rng: &mut R,
) -> Vec<MotionState> {
    match model.kind {
        MotionKind::Breathing => breathing(model, m_slow, t_st, rng),
        MotionKind::Talking => talking(model, m_slow, t_st, rng),
        MotionKind::Moving => moving(model, m_slow, t_st, rng),
    }
}

fn state(delay_offset: f64, rel_amp: f64) -> MotionState {
    MotionState {
        delay_offset,
        amp_factor: Complex64::new(1.0 + rel_amp, 0.0),
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn breathing<R: Rng + ?Sized>(
    model: &MotionModel,
    m_slow: usize,
    t_st: f64,
    rng: &mut R,
) -> Vec<MotionState> {
    let step = TAU * model.rate * t_st;
    let mut phase = model.phase;
    (0..m_slow)
        .map(|m| {
            if m > 0 {
                phase += if model.jitter > 0.0 {
                    step * (1.0 + model.jitter * normal(rng))
                } else {
                    step
                };
            }
            let s = phase.sin();
            state(model.delay_excursion * s, model.amp_excursion * s)
        })
        .collect()
}

fn talking<R: Rng + ?Sized>(
    model: &MotionModel,
    m_slow: usize,
    t_st: f64,
    rng: &mut R,
) -> Vec<MotionState> {
    let step = TAU * model.rate * t_st;
    let mut phase = model.phase;
    // slowly varying loudness envelope plus a fast irregular component
    let mut envelope = 1.0;
    let mut fast = 0.0;
    (0..m_slow)
        .map(|m| {
            if m > 0 {
                phase += step * (1.0 + model.jitter * normal(rng)).max(0.0);
                envelope = 0.9 * envelope + 0.1 * (1.0 + model.jitter * normal(rng));
                fast = 0.7 * fast + 0.3 * model.jitter * normal(rng);
            }
            let s = (envelope * phase.sin() + fast).clamp(-1.5, 1.5);
            state(model.delay_excursion * s, model.amp_excursion * s)
        })
        .collect()
}

fn reflect(x: f64) -> f64 {
    // fold into [-1, 1]
    let y = (x + 1.0).rem_euclid(4.0);
    if y <= 2.0 {
        y - 1.0
    } else {
        3.0 - y
    }
}

fn moving<R: Rng + ?Sized>(
    model: &MotionModel,
    m_slow: usize,
    t_st: f64,
    rng: &mut R,
) -> Vec<MotionState> {
    // piecewise-constant velocities, redrawn at a Poisson rate of `rate`
    let redraw = (model.rate * t_st).min(1.0);
    let scale = model.jitter * TAU * model.rate * t_st;
    let mut pos = (model.phase.sin(), model.phase.cos());
    let mut vel = (0.0, 0.0);
    (0..m_slow)
        .map(|m| {
            if m == 0 || rng.gen::<f64>() < redraw {
                vel = (scale * normal(rng), scale * normal(rng));
            }
            if m > 0 {
                pos = (reflect(pos.0 + vel.0), reflect(pos.1 + vel.1));
            }
            state(model.delay_excursion * pos.0, model.amp_excursion * pos.1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn motionless_breathing() {
        let model = MotionModel {
            delay_excursion: 0.0,
            amp_excursion: 0.0,
            ..MotionModel::default_for(MotionKind::Breathing)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for s in motion_trajectory(&model, 100, 0.1, &mut rng) {
            assert_eq!(s, MotionState::STILL);
        }
    }

    #[test]
    fn breathing_is_a_sinusoid() {
        let model = MotionModel::default_for(MotionKind::Breathing);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let traj = motion_trajectory(&model, 100, 0.1, &mut rng);
        let expected = model.delay_excursion * (TAU * 0.25 * 1.0f64).sin();
        assert!((traj[10].delay_offset - expected).abs() < 1e-24);
        assert!((traj[10].delay_offset - model.delay_excursion).abs() < 1e-24);
        assert_eq!(traj[0].delay_offset, 0.0);
    }

    #[test]
    fn equal_seeds_give_equal_trajectories() {
        for kind in [MotionKind::Breathing, MotionKind::Talking, MotionKind::Moving] {
            let model = MotionModel {
                jitter: 0.5,
                ..MotionModel::default_for(kind)
            };
            let a = motion_trajectory(&model, 100, 0.1, &mut ChaCha8Rng::seed_from_u64(9));
            let b = motion_trajectory(&model, 100, 0.1, &mut ChaCha8Rng::seed_from_u64(9));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn excursions_grow_with_activity() {
        let peak = |kind| {
            let model = MotionModel::default_for(kind);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            motion_trajectory(&model, 1000, 0.1, &mut rng)
                .iter()
                .map(|s| s.delay_offset.abs())
                .fold(0.0, f64::max)
        };
        let (b, t, m) = (
            peak(MotionKind::Breathing),
            peak(MotionKind::Talking),
            peak(MotionKind::Moving),
        );
        assert!(b < t && t < m, "{b} {t} {m}");
    }

    #[test]
    fn reflect_folds_into_unit_interval() {
        for x in [-7.3, -1.0, -0.2, 0.0, 0.9, 1.0, 1.5, 5.25] {
            let y = reflect(x);
            assert!((-1.0..=1.0).contains(&y), "{x} -> {y}");
        }
        assert!((reflect(1.25) - 0.75).abs() < 1e-12);
        assert!((reflect(-1.25) + 0.75).abs() < 1e-12);
    }
}
