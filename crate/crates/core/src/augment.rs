//! SNR-referenced noise injection and unit-energy normalization.
//!
//! The SNR of an augmented sample is `E_s / ‖V‖²`, where `E_s` is the median
//! residual energy of the breathing training samples. The same reference is
//! used for every activity, so louder activities end up at a higher
//! effective SNR than breathing.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radar::MeanRemovedMatrix;

/// Reference signal energy `E_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrReference {
    pub e_s: f64,
}

impl SnrReference {
    pub fn new(e_s: f64) -> Result<Self> {
        if !(e_s > 0.0 && e_s.is_finite()) {
            return Err(Error::Config(format!("reference energy must be positive, got {e_s}")));
        }
        Ok(Self { e_s })
    }
}

/// How augmentation SNRs are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SnrMode {
    /// Uniform in dB on `[lo, hi]`, one draw per training instance.
    TrainUniform { lo: f64, hi: f64 },
    /// Every listed SNR once (evaluation).
    FixedGrid { snr_db: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentPolicy {
    pub mode: SnrMode,
    /// Rescale each noise draw so that `E_s / ‖V‖²` hits the target SNR
    /// exactly instead of only in expectation.
    #[serde(default)]
    pub exact_scaling: bool,
}

pub const TRAIN_SNR_LO_DB: f64 = -30.0;
pub const TRAIN_SNR_HI_DB: f64 = 0.0;

/// `-10, -11, ..., -40` dB.
pub fn default_eval_grid() -> Vec<f64> {
    (10..=40).map(|k| -(k as f64)).collect()
}

impl AugmentPolicy {
    pub fn training() -> Self {
        Self::training_range(TRAIN_SNR_LO_DB, TRAIN_SNR_HI_DB)
    }

    pub fn training_range(lo: f64, hi: f64) -> Self {
        Self {
            mode: SnrMode::TrainUniform { lo, hi },
            exact_scaling: false,
        }
    }

    pub fn grid(snr_db: Vec<f64>) -> Self {
        Self {
            mode: SnrMode::FixedGrid { snr_db },
            exact_scaling: false,
        }
    }

    pub fn with_exact_scaling(mut self, on: bool) -> Self {
        self.exact_scaling = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.mode {
            SnrMode::TrainUniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::Config(format!("bad training SNR interval [{lo}, {hi}]")));
                }
            }
            SnrMode::FixedGrid { snr_db } => {
                if snr_db.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("evaluation grid values must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

/// Lower median of the given energies.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

/// `E_s` = lower median of `‖R̃‖²` over the breathing training residuals.
pub fn compute_reference_energy(breathing: &[MeanRemovedMatrix]) -> Result<SnrReference> {
    let energies: Vec<f64> = breathing.iter().map(MeanRemovedMatrix::energy).collect();
    let e_s = lower_median(&energies).ok_or(Error::EmptyInput("breathing residuals"))?;
    SnrReference::new(e_s)
}

/// Per-component noise variance `σ² = E_s / (2 M N 10^(SNR/10))`.
pub fn noise_sigma(reference: SnrReference, snr_db: f64, n: usize, m: usize) -> f64 {
    reference.e_s / (2.0 * (m * n) as f64 * 10f64.powf(snr_db / 10.0))
}

/// Adds circularly-symmetric white Gaussian noise at `snr_db`.
///
/// `snr_db = +inf` yields zero variance and returns the input unchanged.
pub fn add_noise<R: Rng + ?Sized>(
    residual: &MeanRemovedMatrix,
    reference: SnrReference,
    snr_db: f64,
    policy: &AugmentPolicy,
    rng: &mut R,
) -> MeanRemovedMatrix {
    let (n, m) = (residual.n_fast(), residual.m_slow());
    let variance = noise_sigma(reference, snr_db, n, m);
    if variance == 0.0 {
        return residual.clone();
    }
    let sigma = variance.sqrt();
    let mut noise: Vec<Complex64> = (0..n * m)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * sigma, im * sigma)
        })
        .collect();
    if policy.exact_scaling {
        let drawn: f64 = noise.iter().map(Complex64::norm_sqr).sum();
        let target = reference.e_s / 10f64.powf(snr_db / 10.0);
        let k = (target / drawn).sqrt();
        noise.iter_mut().for_each(|z| *z *= k);
    }
    let mut out = residual.clone();
    for (z, v) in out.matrix_mut().as_mut_slice().iter_mut().zip(&noise) {
        *z += v;
    }
    out
}

/// Scales the residual to unit Frobenius energy.
pub fn normalize_unit_energy(residual: &MeanRemovedMatrix) -> Result<MeanRemovedMatrix> {
    let energy = residual.energy();
    if !(energy > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let mut out = residual.clone();
    out.matrix_mut().scale(1.0 / energy.sqrt());
    Ok(out)
}

/// Noise at `snr_db` followed by unit-energy normalization: the network input
/// for one draw.
pub fn augment<R: Rng + ?Sized>(
    residual: &MeanRemovedMatrix,
    reference: SnrReference,
    snr_db: f64,
    policy: &AugmentPolicy,
    rng: &mut R,
) -> Result<MeanRemovedMatrix> {
    normalize_unit_energy(&add_noise(residual, reference, snr_db, policy, rng))
}

pub fn draw_training_snr<R: Rng + ?Sized>(policy: &AugmentPolicy, rng: &mut R) -> Result<f64> {
    match policy.mode {
        SnrMode::TrainUniform { lo, hi } => {
            if lo == hi {
                Ok(lo)
            } else {
                Ok(rng.gen_range(lo..=hi))
            }
        }
        SnrMode::FixedGrid { .. } => Err(Error::WrongMode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar::ComplexMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rustfft::FftPlanner;

    fn residual_with_energy(n: usize, m: usize, energy: f64) -> MeanRemovedMatrix {
        let v = (energy / (n * m) as f64).sqrt();
        let data = (0..n * m)
            .map(|i| Complex64::new(if i % 2 == 0 { v } else { -v }, 0.0))
            .collect();
        MeanRemovedMatrix::from_matrix(ComplexMatrix::from_column_major(n, m, data).unwrap())
    }

    #[test]
    fn reference_energy_medians() {
        let r = |e| residual_with_energy(1, 2, e);
        assert!((compute_reference_energy(&[r(7.0)]).unwrap().e_s - 7.0).abs() < 1e-12);
        let es = compute_reference_energy(&[r(9.0), r(1.0), r(2.0)]).unwrap().e_s;
        assert!((es - 2.0).abs() < 1e-12);
        let es = compute_reference_energy(&[r(100.0), r(3.0), r(1.0), r(2.0)]).unwrap().e_s;
        assert!((es - 2.0).abs() < 1e-12);
        assert!(matches!(compute_reference_energy(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn variance_formula() {
        let one = SnrReference::new(1.0).unwrap();
        assert!((noise_sigma(one, 0.0, 64, 100) - 7.8125e-5).abs() < 1e-18);
        assert_eq!(noise_sigma(one, 0.0, 64, 100), 1.0 / 12800.0);
        let ratio = noise_sigma(one, -17.0, 64, 100) / noise_sigma(one, -7.0, 64, 100);
        assert!((ratio - 10.0).abs() < 1e-12);
        let r = SnrReference::new(2.0 * 64.0 * 100.0).unwrap();
        assert_eq!(noise_sigma(r, 0.0, 64, 100), 1.0);
    }

    #[test]
    fn infinite_snr_is_passthrough() {
        let x = residual_with_energy(4, 5, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = add_noise(&x, SnrReference::new(1.0).unwrap(), f64::INFINITY, &AugmentPolicy::training(), &mut rng);
        assert_eq!(x, y);
    }

    #[test]
    fn exact_scaling_hits_the_ratio() {
        let reference = SnrReference::new(1.0).unwrap();
        let zero = MeanRemovedMatrix::from_matrix(ComplexMatrix::zeros(64, 100));
        let policy = AugmentPolicy::training().with_exact_scaling(true);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let snr = -30.0 + seed as f64 * 1.5;
            let v = add_noise(&zero, reference, snr, &policy, &mut rng);
            let ratio = reference.e_s / v.energy();
            let want = 10f64.powf(snr / 10.0);
            assert!((ratio - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn noise_energy_matches_in_expectation() {
        let reference = SnrReference::new(1.0).unwrap();
        let zero = MeanRemovedMatrix::from_matrix(ComplexMatrix::zeros(64, 100));
        let policy = AugmentPolicy::training();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let trials = 2000;
        let mean: f64 = (0..trials)
            .map(|_| add_noise(&zero, reference, -20.0, &policy, &mut rng).energy())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 100.0).abs() < 2.0, "{mean}");
    }

    #[test]
    fn noise_does_not_depend_on_the_sample() {
        // same seed, different clean signals: the added noise is identical
        let reference = SnrReference::new(5.0).unwrap();
        let a = residual_with_energy(8, 10, 1.0);
        let b = residual_with_energy(8, 10, 50.0);
        let policy = AugmentPolicy::training();
        let na = add_noise(&a, reference, -10.0, &policy, &mut ChaCha8Rng::seed_from_u64(3));
        let nb = add_noise(&b, reference, -10.0, &policy, &mut ChaCha8Rng::seed_from_u64(3));
        for i in 0..80 {
            let da = na.matrix().as_slice()[i] - a.matrix().as_slice()[i];
            let db = nb.matrix().as_slice()[i] - b.matrix().as_slice()[i];
            assert!((da - db).norm() < 1e-12);
        }
    }

    #[test]
    fn normalization() {
        let x = residual_with_energy(2, 2, 4.0);
        let y = normalize_unit_energy(&x).unwrap();
        for (a, b) in x.matrix().as_slice().iter().zip(y.matrix().as_slice()) {
            assert!((a * 0.5 - b).norm() < 1e-15);
        }
        let z = normalize_unit_energy(&y).unwrap();
        for (a, b) in y.matrix().as_slice().iter().zip(z.matrix().as_slice()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!((z.energy() - 1.0).abs() < 1e-14);
        let zero = MeanRemovedMatrix::from_matrix(ComplexMatrix::zeros(2, 2));
        assert!(matches!(normalize_unit_energy(&zero), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn training_snr_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fixed = AugmentPolicy::training_range(-15.0, -15.0);
        assert!((0..10).all(|_| draw_training_snr(&fixed, &mut rng).unwrap() == -15.0));

        let policy = AugmentPolicy::training();
        let draws: Vec<f64> = (0..100_000).map(|_| draw_training_snr(&policy, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean + 15.0).abs() < 0.1, "{mean}");
        assert!(draws.iter().all(|d| (-30.0..=0.0).contains(d)));

        let a: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..5).map(|_| draw_training_snr(&policy, &mut r).unwrap()).collect()
        };
        let b: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..5).map(|_| draw_training_snr(&policy, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
        assert!(matches!(
            draw_training_snr(&AugmentPolicy::grid(default_eval_grid()), &mut rng),
            Err(Error::WrongMode)
        ));
    }

    #[test]
    fn grid_has_31_points() {
        let g = default_eval_grid();
        assert_eq!(g.len(), 31);
        assert_eq!((g[0], g[30]), (-10.0, -40.0));
    }

    /// Mean spectral flatness (geometric over arithmetic mean of the
    /// periodogram) across rows.
    fn mean_row_flatness(x: &MeanRemovedMatrix) -> f64 {
        let m = x.m_slow();
        let fft = FftPlanner::new().plan_fft_forward(m);
        let mut total = 0.0;
        for row in 0..x.n_fast() {
            let mut buf = x.matrix().row(row);
            fft.process(&mut buf);
            let p: Vec<f64> = buf.iter().map(|z| z.norm_sqr().max(1e-300)).collect();
            let geo = (p.iter().map(|v| v.ln()).sum::<f64>() / m as f64).exp();
            let arith = p.iter().sum::<f64>() / m as f64;
            total += geo / arith;
        }
        total / x.n_fast() as f64
    }

    #[test]
    fn augmented_empty_sample_looks_white() {
        // Periodogram bins of complex white noise are i.i.d. exponential, so
        // the flatness concentrates near exp(-γ) ≈ 0.5615.
        let cfg = crate::simulator::RadarConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let recs = crate::simulator::synth_dataset(
            &crate::simulator::SynthSpec::new(5, 0, 0, 1),
            &cfg,
            &mut rng,
        )
        .unwrap();
        let residuals: Vec<_> = recs
            .iter()
            .map(|r| crate::radar::mean_remove(&r.cir).unwrap().1)
            .collect();
        let reference = compute_reference_energy(&residuals[..5]).unwrap();
        let empty = &residuals[5];
        let y = augment(empty, reference, -30.0, &AugmentPolicy::training(), &mut rng).unwrap();
        let flat = mean_row_flatness(&y);
        assert!((0.50..0.62).contains(&flat), "{flat}");
        // the strongest row of a clean breathing residual is far from white
        let b = &residuals[0];
        let strongest = (0..b.n_fast())
            .max_by(|&i, &j| {
                let e = |r: usize| b.matrix().row(r).iter().map(|z| z.norm_sqr()).sum::<f64>();
                e(i).total_cmp(&e(j))
            })
            .unwrap();
        let row = ComplexMatrix::from_column_major(1, b.m_slow(), b.matrix().row(strongest)).unwrap();
        assert!(mean_row_flatness(&MeanRemovedMatrix::from_matrix(row)) < 0.3);
    }
}
