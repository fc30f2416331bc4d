use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::motion::{MotionKind, MotionModel};
use super::scene::{simulate_received, PathComponent, Scene};
use super::RadarConfig;
use crate::error::Result;
use crate::radar::{ActivityLabel, Provenance, SampleRecord};

/// Receiver noise of the synthetic recordings, well below the target signal.
pub const DEFAULT_NOISE_SIGMA: f64 = 1e-4;

/// Per-class sample counts for [`synth_dataset`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthSpec {
    pub counts: BTreeMap<ActivityLabel, usize>,
    /// Receiver noise for every sample, overriding the scene's own.
    pub noise_sigma: Option<f64>,
}

impl SynthSpec {
    pub fn new(breathing: usize, talking: usize, moving: usize, empty: usize) -> Self {
        let counts = [
            (ActivityLabel::Breathing, breathing),
            (ActivityLabel::Talking, talking),
            (ActivityLabel::Moving, moving),
            (ActivityLabel::Empty, empty),
        ]
        .into_iter()
        .collect();
        Self {
            counts,
            noise_sigma: None,
        }
    }

    pub fn count(&self, label: ActivityLabel) -> usize {
        self.counts.get(&label).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Generates labelled synthetic samples.
///
/// Records come out grouped by label (breathing, talking, moving, empty).
/// Each sample gets its own seed drawn from `rng` up front, so the output
/// does not depend on how many worker threads render it.
pub fn synth_dataset<R: Rng + ?Sized>(
    spec: &SynthSpec,
    cfg: &RadarConfig,
    rng: &mut R,
) -> Result<Vec<SampleRecord>> {
    synth_dataset_with(spec, cfg, None, rng)
}

/// Like [`synth_dataset`], but with a fixed template scene: its clutter and
/// noise are reused for every sample, its target paths for every occupied
/// sample (with the motion kind switched to the sample's activity unless it
/// already matches).
pub fn synth_dataset_with<R: Rng + ?Sized>(
    spec: &SynthSpec,
    cfg: &RadarConfig,
    template: Option<&Scene>,
    rng: &mut R,
) -> Result<Vec<SampleRecord>> {
    cfg.validate()?;
    let mut jobs = Vec::with_capacity(spec.total());
    for label in ActivityLabel::ALL {
        for i in 0..spec.count(label) {
            jobs.push((label, i, rng.gen::<u64>()));
        }
    }
    jobs.into_par_iter()
        .map(|(label, i, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut scene = match template {
                Some(t) => scene_from_template(t, label, &mut rng),
                None => random_scene(label, cfg, &mut rng),
            };
            if let Some(sigma) = spec.noise_sigma {
                scene.noise_sigma = sigma;
            }
            let cir = simulate_received(&scene, cfg, &mut rng)?;
            let provenance = Provenance {
                car: "sim".into(),
                seat: label.is_occupied().then(|| "sim".to_string()),
                participant: label.is_occupied().then(|| format!("sim-{i:06}")),
                recording: format!("sim-{label}"),
                segment_index: i,
            };
            Ok(SampleRecord::new(cir, label, provenance))
        })
        .collect()
}

fn cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn randomized_motion<R: Rng + ?Sized>(base: MotionModel, rng: &mut R) -> MotionModel {
    MotionModel {
        rate: base.rate * rng.gen_range(0.8..1.2),
        phase: rng.gen_range(0.0..TAU),
        ..base
    }
}

/// Cabin-like random scene: a handful of static reflections and, when
/// occupied, one to three target paths sharing a motion model.
pub fn random_scene<R: Rng + ?Sized>(label: ActivityLabel, cfg: &RadarConfig, rng: &mut R) -> Scene {
    let window = cfg.window();
    let clutter_paths = (0..6)
        .map(|_| {
            let delay = rng.gen_range(0.1..0.8) * window;
            let gain = (-delay / (0.3 * window)).exp();
            PathComponent::clutter(cn(rng) * gain, delay)
        })
        .collect();
    let mut target_paths = Vec::new();
    if let Some(kind) = MotionKind::from_label(label) {
        let motion = randomized_motion(MotionModel::default_for(kind), rng);
        let k = rng.gen_range(1..=3);
        let mut delay = rng.gen_range(0.25..0.5) * window;
        let mut gain = rng.gen_range(0.2..0.5);
        for _ in 0..k {
            let amp = Complex64::from_polar(gain, rng.gen_range(0.0..TAU));
            target_paths.push((PathComponent::target(amp, delay), motion));
            delay += rng.gen_range(0.5e-9f64..3e-9).min(0.1 * window);
            gain *= 0.5;
        }
    }
    Scene {
        target_paths,
        clutter_paths,
        noise_sigma: DEFAULT_NOISE_SIGMA,
    }
}

fn scene_from_template<R: Rng + ?Sized>(template: &Scene, label: ActivityLabel, rng: &mut R) -> Scene {
    let mut scene = Scene {
        target_paths: Vec::new(),
        clutter_paths: template.clutter_paths.clone(),
        noise_sigma: template.noise_sigma,
    };
    if let Some(kind) = MotionKind::from_label(label) {
        let base = template
            .target_paths
            .iter()
            .map(|(_, m)| *m)
            .find(|m| m.kind == kind)
            .unwrap_or_else(|| MotionModel::default_for(kind));
        let motion = randomized_motion(base, rng);
        scene.target_paths = template
            .target_paths
            .iter()
            .map(|(p, _)| (*p, motion))
            .collect();
    }
    scene
}
