//! Glue between the dataset, augmentation, networks and evaluation:
//! training batches drawn on the fly, the fixed validation set, detector
//! scorers and the held-out test set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{augment, compute_reference_energy, draw_training_snr, AugmentPolicy, SnrReference};
use crate::baseline::{energy_detector, energy_detector_flops, fft_detector, fft_detector_flops};
use crate::error::{Error, Result};
use crate::eval::{Scorer, TestSet};
use crate::ingest::{build_epoch_plan, EpochPlan, Partition, ReuseFactors, SplitAssignment};
use crate::neural::{
    infer_in_chunks, network_input, sigmoid, Activations, Batch, BatchSource, Dimensionality,
    Network, Tensor, ValidationSet,
};
use crate::radar::{mean_remove, ActivityLabel, MeanRemovedMatrix, SampleRecord};
use crate::seed;

const VALIDATION_STREAM: u64 = 0x7661_6c69;

/// Residuals and labels of a whole dataset, index-aligned with its manifest.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub residuals: Vec<MeanRemovedMatrix>,
    pub labels: Vec<ActivityLabel>,
    pub split: SplitAssignment,
}

impl PreparedData {
    pub fn new(records: &[SampleRecord], split: SplitAssignment) -> Result<Self> {
        if records.len() != split.partitions.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} records, {} split entries",
                records.len(),
                split.partitions.len()
            )));
        }
        let residuals = records
            .par_iter()
            .map(|r| mean_remove(&r.cir).map(|(_, res)| res))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            residuals,
            labels: records.iter().map(|r| r.label).collect(),
            split,
        })
    }

    pub fn shape(&self) -> Result<(usize, usize)> {
        let r = self.residuals.first().ok_or(Error::EmptyInput("dataset"))?;
        Ok((r.n_fast(), r.m_slow()))
    }

    /// `E_s` from the breathing residuals of the training partition.
    pub fn reference(&self) -> Result<SnrReference> {
        let breathing: Vec<MeanRemovedMatrix> = self
            .split
            .indices(Partition::Train)
            .into_iter()
            .filter(|&i| self.labels[i] == ActivityLabel::Breathing)
            .map(|i| self.residuals[i].clone())
            .collect();
        if breathing.is_empty() {
            return Err(Error::EmptyClass("breathing training"));
        }
        compute_reference_energy(&breathing)
    }

    pub fn test_set(&self) -> TestSet {
        let idx = self.split.indices(Partition::Test);
        TestSet {
            samples: idx.iter().map(|&i| self.residuals[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

fn target(label: ActivityLabel) -> f64 {
    if label.is_occupied() {
        1.0
    } else {
        0.0
    }
}

/// Draw `position` of an epoch: random SNR, noise, normalization, layout.
fn draw_input(
    residual: &MeanRemovedMatrix,
    reference: SnrReference,
    policy: &AugmentPolicy,
    dims: Dimensionality,
    stream_seed: u64,
) -> Result<Tensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    let snr = draw_training_snr(policy, &mut rng)?;
    let x = augment(residual, reference, snr, policy, &mut rng)?;
    Ok(network_input(&x, dims))
}

/// Training batches following the epoch plan; every draw is augmented
/// independently with a seed derived from `(epoch, position)`.
pub struct AugmentedSource<'a> {
    pub data: &'a PreparedData,
    pub reference: SnrReference,
    pub policy: AugmentPolicy,
    pub reuse: ReuseFactors,
    pub dims: Dimensionality,
    pub batch_size: usize,
    pub seed: u64,
    plan: Option<(usize, EpochPlan)>,
}

impl<'a> AugmentedSource<'a> {
    pub fn new(
        data: &'a PreparedData,
        reference: SnrReference,
        policy: AugmentPolicy,
        reuse: ReuseFactors,
        dims: Dimensionality,
        batch_size: usize,
        seed: u64,
    ) -> Result<Self> {
        policy.validate()?;
        if batch_size < 2 {
            return Err(Error::Config("batch size must be at least 2".into()));
        }
        Ok(Self {
            data,
            reference,
            policy,
            reuse,
            dims,
            batch_size,
            seed,
            plan: None,
        })
    }

    fn plan(&mut self, epoch: usize) -> Result<&EpochPlan> {
        if self.plan.as_ref().map(|(e, _)| *e) != Some(epoch) {
            let plan = build_epoch_plan(
                &self.data.labels,
                &self.data.split,
                self.reuse,
                seed::derive(self.seed, &[epoch as u64]),
            )?;
            self.plan = Some((epoch, plan));
        }
        Ok(&self.plan.as_ref().expect("just set").1)
    }
}

impl BatchSource for AugmentedSource<'_> {
    fn batch_count(&mut self, epoch: usize) -> Result<usize> {
        let bs = self.batch_size;
        let n = self.plan(epoch)?.len();
        Ok(crate::neural::train::batch_ranges(n, bs).len())
    }

    fn batch(&mut self, epoch: usize, index: usize) -> Result<Batch> {
        let bs = self.batch_size;
        let (data, reference, dims, base) = (self.data, self.reference, self.dims, self.seed);
        let policy = self.policy.clone();
        let plan = self.plan(epoch)?;
        let range = crate::neural::train::batch_ranges(plan.len(), bs)
            .into_iter()
            .nth(index)
            .ok_or_else(|| Error::Config(format!("batch {index} out of range")))?;
        let entries = &plan.entries[range.clone()];
        let inputs = entries
            .par_iter()
            .zip(range)
            .map(|(e, pos)| {
                let s = seed::derive(base, &[epoch as u64, pos as u64]);
                draw_input(&data.residuals[e.record], reference, &policy, dims, s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Batch {
            inputs: Activations::from_samples(&inputs)?,
            labels: entries.iter().map(|e| target(data.labels[e.record])).collect(),
        })
    }
}

/// The validation partition augmented once with the training SNR policy.
pub fn validation_set(
    data: &PreparedData,
    reference: SnrReference,
    policy: &AugmentPolicy,
    dims: Dimensionality,
    seed: u64,
) -> Result<ValidationSet> {
    let idx = data.split.indices(Partition::Validation);
    let inputs = idx
        .par_iter()
        .map(|&i| {
            let s = seed::derive(seed, &[VALIDATION_STREAM, i as u64]);
            draw_input(&data.residuals[i], reference, policy, dims, s)
        })
        .collect::<Result<Vec<_>>>()?;
    if inputs.is_empty() {
        return Err(Error::EmptyInput("validation partition"));
    }
    ValidationSet::new(&inputs, idx.iter().map(|&i| target(data.labels[i])).collect())
}

/// Samples scored per network call.
const SCORE_CHUNK: usize = 128;

/// A trained network as a detector; the score is `sigmoid(logit)`.
pub struct NetworkScorer {
    pub network: Network,
    pub name: String,
}

impl NetworkScorer {
    pub fn new(network: Network) -> Self {
        Self {
            name: network.variant.name.clone(),
            network,
        }
    }

    /// Raw logits for already augmented residuals.
    pub fn logits(&self, inputs: &[MeanRemovedMatrix]) -> Result<Vec<f64>> {
        let dims = self.network.variant.dimensionality;
        let mut out = Vec::with_capacity(inputs.len());
        for chunk in inputs.chunks(SCORE_CHUNK) {
            let tensors: Vec<Tensor> = chunk.par_iter().map(|x| network_input(x, dims)).collect();
            let batch = Activations::from_samples(&tensors)?;
            out.extend(infer_in_chunks(&self.network, &batch, SCORE_CHUNK)?);
        }
        Ok(out)
    }
}

impl Scorer for NetworkScorer {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn flops(&self) -> u64 {
        self.network.flop_count(self.network.input_shape)
    }

    fn score(&self, inputs: &[MeanRemovedMatrix]) -> Result<Vec<f64>> {
        Ok(self.logits(inputs)?.into_iter().map(sigmoid).collect())
    }
}

/// Sliding-window energy detector over `window` columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyScorer {
    pub window: usize,
    pub n_fast: usize,
    pub m_slow: usize,
}

impl Scorer for EnergyScorer {
    fn name(&self) -> String {
        "energy".into()
    }

    fn flops(&self) -> u64 {
        energy_detector_flops(self.n_fast, self.m_slow)
    }

    fn score(&self, inputs: &[MeanRemovedMatrix]) -> Result<Vec<f64>> {
        inputs.par_iter().map(|x| energy_detector(x, self.window)).collect()
    }
}

/// Slow-time spectral peak detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FftScorer {
    pub n_fast: usize,
    pub m_slow: usize,
}

impl Scorer for FftScorer {
    fn name(&self) -> String {
        "fft".into()
    }

    fn flops(&self) -> u64 {
        fft_detector_flops(self.n_fast, self.m_slow)
    }

    fn score(&self, inputs: &[MeanRemovedMatrix]) -> Result<Vec<f64>> {
        inputs.par_iter().map(fft_detector).collect()
    }
}
