//! SNR sweeps and the complexity ablation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::auc::roc_auc;
use super::report::{EvalReport, EvalRow, ReportProvenance};
use crate::augment::{augment, default_eval_grid, AugmentPolicy, SnrReference};
use crate::error::{Error, Result};
use crate::radar::{ActivityLabel, ComplexMatrix, MeanRemovedMatrix};
use crate::seed;

/// A detector that maps augmented, unit-energy residuals to scores.
pub trait Scorer: Sync {
    fn name(&self) -> String;
    /// Operations per scored sample.
    fn flops(&self) -> u64;
    fn score(&self, inputs: &[MeanRemovedMatrix]) -> Result<Vec<f64>>;
}

/// Clean test residuals with their activity labels.
#[derive(Debug, Clone, Default)]
pub struct TestSet {
    pub samples: Vec<MeanRemovedMatrix>,
    pub labels: Vec<ActivityLabel>,
}

impl TestSet {
    pub fn indices(&self, label: ActivityLabel) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == label).collect()
    }

    fn shape(&self) -> Result<(usize, usize)> {
        let s = self.samples.first().ok_or(Error::EmptyInput("test set"))?;
        Ok((s.n_fast(), s.m_slow()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grid: Vec<f64>,
    pub activities: Vec<ActivityLabel>,
    pub seed: u64,
    /// Extra pure-noise negatives per SNR point; 0 disables the pool.
    pub noise_negatives: usize,
    pub exact_scaling: bool,
}

impl SweepConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            grid: default_eval_grid(),
            activities: ActivityLabel::OCCUPIED.to_vec(),
            seed,
            noise_negatives: 0,
            exact_scaling: false,
        }
    }
}

/// Activity-specific SNRs of the complexity ablation.
pub fn ablation_anchors() -> Vec<(ActivityLabel, f64)> {
    vec![
        (ActivityLabel::Breathing, -20.0),
        (ActivityLabel::Talking, -24.0),
        (ActivityLabel::Moving, -30.0),
    ]
}

/// Augmentation of test sample `index` at `snr_db`. The draw depends only on
/// the seed, the SNR and the sample, so every detector and every activity
/// sees the same noisy negatives.
fn augmented(
    sample: &MeanRemovedMatrix,
    stream: u64,
    index: usize,
    snr_db: f64,
    reference: SnrReference,
    policy: &AugmentPolicy,
    seed: u64,
) -> Result<MeanRemovedMatrix> {
    let s = seed::derive(seed, &[stream, snr_db.to_bits(), index as u64]);
    augment(sample, reference, snr_db, policy, &mut ChaCha8Rng::seed_from_u64(s))
}

fn augment_all(
    test: &TestSet,
    idx: &[usize],
    snr_db: f64,
    reference: SnrReference,
    policy: &AugmentPolicy,
    seed: u64,
) -> Result<Vec<MeanRemovedMatrix>> {
    idx.par_iter()
        .map(|&i| augmented(&test.samples[i], 0, i, snr_db, reference, policy, seed))
        .collect()
}

fn noise_pool(
    n: usize,
    m: usize,
    count: usize,
    snr_db: f64,
    reference: SnrReference,
    policy: &AugmentPolicy,
    seed: u64,
) -> Result<Vec<MeanRemovedMatrix>> {
    let zero = MeanRemovedMatrix::from_matrix(ComplexMatrix::zeros(n, m));
    (0..count)
        .into_par_iter()
        .map(|k| augmented(&zero, 1, k, snr_db, reference, policy, seed))
        .collect()
}

/// Score function receiving the augmented inputs and their true labels.
pub type ScoreFn<'a> = dyn Fn(&[MeanRemovedMatrix], &[bool]) -> Result<Vec<f64>> + Sync + 'a;

/// Evaluates `(activity, snr)` points. Positives are the test samples of
/// the activity, negatives the empty test samples plus the optional noise
/// pool; all are augmented at the point's SNR and normalized.
pub fn sweep_points(
    name: &str,
    flops: u64,
    test: &TestSet,
    reference: SnrReference,
    points: &[(ActivityLabel, f64)],
    cfg: &SweepConfig,
    score: &ScoreFn,
) -> Result<EvalReport> {
    let (n, m) = test.shape()?;
    let policy = AugmentPolicy::grid(points.iter().map(|p| p.1).collect()).with_exact_scaling(cfg.exact_scaling);
    let neg_idx = test.indices(ActivityLabel::Empty);
    if neg_idx.is_empty() && cfg.noise_negatives == 0 {
        return Err(Error::MissingClass(ActivityLabel::Empty));
    }
    for &(a, _) in points {
        if !a.is_occupied() {
            return Err(Error::Config("sweep activities must be occupied classes".into()));
        }
        if test.indices(a).is_empty() {
            return Err(Error::MissingClass(a));
        }
    }

    let mut negatives: BTreeMap<u64, Vec<MeanRemovedMatrix>> = BTreeMap::new();
    let mut rows = Vec::with_capacity(points.len());
    for &(activity, snr) in points {
        if let std::collections::btree_map::Entry::Vacant(e) = negatives.entry(snr.to_bits()) {
            let mut neg = augment_all(test, &neg_idx, snr, reference, &policy, cfg.seed)?;
            neg.extend(noise_pool(n, m, cfg.noise_negatives, snr, reference, &policy, cfg.seed)?);
            e.insert(neg);
        }
        let neg = &negatives[&snr.to_bits()];
        let pos_idx = test.indices(activity);
        let mut inputs = augment_all(test, &pos_idx, snr, reference, &policy, cfg.seed)?;
        inputs.extend(neg.iter().cloned());
        let labels: Vec<bool> = (0..inputs.len()).map(|i| i < pos_idx.len()).collect();
        let scores = score(&inputs, &labels)?;
        rows.push(EvalRow {
            name: name.to_string(),
            activity,
            snr_db: snr,
            auc: roc_auc(&scores, &labels)?,
            flops,
            n_pos: pos_idx.len(),
            n_neg: neg.len(),
            seed: cfg.seed,
        });
    }
    Ok(EvalReport {
        rows,
        provenance: ReportProvenance {
            seed: cfg.seed,
            config_hash: String::new(),
            noise_negatives: cfg.noise_negatives,
        },
    })
}

/// Full grid for every configured activity, using an arbitrary score function.
pub fn sweep_with(
    name: &str,
    flops: u64,
    test: &TestSet,
    reference: SnrReference,
    cfg: &SweepConfig,
    score: &ScoreFn,
) -> Result<EvalReport> {
    if cfg.grid.is_empty() {
        return Err(Error::Config("empty SNR grid".into()));
    }
    let points: Vec<(ActivityLabel, f64)> = cfg
        .activities
        .iter()
        .flat_map(|&a| cfg.grid.iter().map(move |&s| (a, s)))
        .collect();
    sweep_points(name, flops, test, reference, &points, cfg, score)
}

/// Sweeps a detector over the SNR grid.
pub fn snr_sweep(
    scorer: &dyn Scorer,
    test: &TestSet,
    reference: SnrReference,
    cfg: &SweepConfig,
) -> Result<EvalReport> {
    sweep_with(&scorer.name(), scorer.flops(), test, reference, cfg, &|x, _| scorer.score(x))
}

/// One point per detector and activity at the activity's anchor SNR.
pub fn ablation(
    scorers: &[&dyn Scorer],
    test: &TestSet,
    reference: SnrReference,
    anchors: &[(ActivityLabel, f64)],
    cfg: &SweepConfig,
) -> Result<EvalReport> {
    let mut report = EvalReport {
        rows: Vec::new(),
        provenance: ReportProvenance {
            seed: cfg.seed,
            config_hash: String::new(),
            noise_negatives: cfg.noise_negatives,
        },
    };
    for s in scorers {
        let r = sweep_points(&s.name(), s.flops(), test, reference, anchors, cfg, &|x, _| s.score(x))?;
        report.extend(r);
    }
    Ok(report)
}

/// Zero-mean complex residual drawn i.i.d., for tests and noise-only pools.
pub fn white_residual(n: usize, m: usize, rng: &mut impl rand::Rng) -> MeanRemovedMatrix {
    use rand_distr::StandardNormal;
    let data = (0..n * m)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let matrix = ComplexMatrix::from_column_major(n, m, data).expect("shape");
    crate::radar::mean_remove_matrix(&matrix).expect("shape").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::auc::null_auc_sd;
    use rand::Rng;

    fn test_set(per_class: usize, empty: usize) -> TestSet {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut t = TestSet::default();
        for &label in ActivityLabel::OCCUPIED.iter() {
            for _ in 0..per_class {
                t.samples.push(white_residual(4, 8, &mut rng));
                t.labels.push(label);
            }
        }
        for _ in 0..empty {
            t.samples.push(white_residual(4, 8, &mut rng));
            t.labels.push(ActivityLabel::Empty);
        }
        t
    }

    fn reference() -> SnrReference {
        SnrReference::new(32.0).unwrap()
    }

    #[test]
    fn oracle_detector_is_perfect_everywhere() {
        let t = test_set(5, 3);
        let cfg = SweepConfig::new(1);
        let r = sweep_with("oracle", 1, &t, reference(), &cfg, &|_, y| {
            Ok(y.iter().map(|&l| l as u8 as f64).collect())
        })
        .unwrap();
        assert_eq!(r.rows.len(), 3 * 31);
        assert!(r.rows.iter().all(|row| row.auc == 1.0));
        assert_eq!(r.rows[0].snr_db, -10.0);
        assert_eq!(r.rows[30].snr_db, -40.0);
    }

    #[test]
    fn random_scores_are_near_one_half() {
        let t = test_set(150, 20);
        let cfg = SweepConfig {
            grid: vec![-20.0],
            activities: vec![ActivityLabel::Breathing],
            ..SweepConfig::new(2)
        };
        let rng = std::sync::Mutex::new(ChaCha8Rng::seed_from_u64(8));
        let r = sweep_with("random", 1, &t, reference(), &cfg, &|x, _| {
            let mut g = rng.lock().unwrap();
            Ok(x.iter().map(|_| g.gen::<f64>()).collect())
        })
        .unwrap();
        let sd = null_auc_sd(150, 20);
        assert!((r.rows[0].auc - 0.5).abs() < 3.0 * sd, "{}", r.rows[0].auc);
    }

    #[test]
    fn missing_classes_are_reported() {
        let mut t = test_set(2, 0);
        let cfg = SweepConfig::new(1);
        let f = |x: &[MeanRemovedMatrix], _: &[bool]| Ok(vec![0.0; x.len()]);
        assert!(matches!(
            sweep_with("x", 1, &t, reference(), &cfg, &f),
            Err(Error::MissingClass(ActivityLabel::Empty))
        ));
        // the noise pool can stand in for empty samples
        let pooled = SweepConfig {
            noise_negatives: 4,
            grid: vec![-10.0],
            ..cfg.clone()
        };
        let r = sweep_with("x", 1, &t, reference(), &pooled, &f).unwrap();
        assert_eq!(r.rows[0].n_neg, 4);
        t.labels.retain(|&l| l != ActivityLabel::Moving);
        t.samples.truncate(t.labels.len());
        assert!(matches!(
            sweep_with("x", 1, &t, reference(), &pooled, &f),
            Err(Error::MissingClass(ActivityLabel::Moving))
        ));
    }

    #[test]
    fn ablation_has_one_row_per_detector_and_activity() {
        struct Const(&'static str);
        impl Scorer for Const {
            fn name(&self) -> String {
                self.0.into()
            }
            fn flops(&self) -> u64 {
                10
            }
            fn score(&self, x: &[MeanRemovedMatrix]) -> Result<Vec<f64>> {
                Ok(x.iter().map(|m| m.matrix().get(0, 0).re).collect())
            }
        }
        let t = test_set(3, 3);
        let (a, b) = (Const("a"), Const("b"));
        let r = ablation(&[&a, &b], &t, reference(), &ablation_anchors(), &SweepConfig::new(3)).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert_eq!(r.rows[2].snr_db, -30.0);
        // identical inputs at the same SNR across sweeps
        let s = snr_sweep(&a, &t, reference(), &SweepConfig::new(3)).unwrap();
        let at20 = s.rows.iter().find(|r| r.snr_db == -20.0 && r.activity == ActivityLabel::Breathing).unwrap();
        assert_eq!(at20.auc, r.rows[0].auc);
    }
}
