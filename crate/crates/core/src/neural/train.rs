//! Mini-batch training with early stopping on validation AUC.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::loss_bce;
use super::network::Network;
use super::optim::{Adam, AdamConfig};
use super::tensor::{Activations, Tensor};
use crate::error::{Error, Result};
use crate::eval::roc_auc;
use crate::seed;

/// One training batch: inputs and 0/1 labels.
#[derive(Debug, Clone)]
pub struct Batch {
    pub inputs: Activations,
    pub labels: Vec<f64>,
}

/// Supplies the batches of each epoch. Batches must hold at least two
/// samples and depend only on `(epoch, index)` so that training can resume.
pub trait BatchSource {
    fn batch_count(&mut self, epoch: usize) -> Result<usize>;
    fn batch(&mut self, epoch: usize, index: usize) -> Result<Batch>;
}

/// Fixed in-memory samples, reshuffled every epoch.
#[derive(Debug, Clone)]
pub struct InMemorySource {
    pub samples: Vec<Tensor>,
    pub labels: Vec<f64>,
    pub batch_size: usize,
    pub seed: u64,
    order: Option<(usize, Vec<usize>)>,
}

impl InMemorySource {
    pub fn new(samples: Vec<Tensor>, labels: Vec<f64>, batch_size: usize, seed: u64) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} samples, {} labels",
                samples.len(),
                labels.len()
            )));
        }
        if samples.len() < 2 || batch_size < 2 {
            return Err(Error::Config("need at least two samples per batch".into()));
        }
        Ok(Self {
            samples,
            labels,
            batch_size,
            seed,
            order: None,
        })
    }

    fn order(&mut self, epoch: usize) -> &[usize] {
        if self.order.as_ref().map(|(e, _)| *e) != Some(epoch) {
            let mut idx: Vec<usize> = (0..self.samples.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(self.seed, &[epoch as u64]));
            idx.shuffle(&mut rng);
            self.order = Some((epoch, idx));
        }
        &self.order.as_ref().expect("just set").1
    }
}

/// Batch boundaries for `n` items; a trailing single item joins the
/// previous batch so batch statistics stay defined.
pub fn batch_ranges(n: usize, batch_size: usize) -> Vec<std::ops::Range<usize>> {
    let mut out: Vec<std::ops::Range<usize>> = (0..n)
        .step_by(batch_size.max(1))
        .map(|s| s..(s + batch_size).min(n))
        .collect();
    if out.len() > 1 && out.last().is_some_and(|r| r.len() == 1) {
        let last = out.pop().expect("non-empty");
        out.last_mut().expect("non-empty").end = last.end;
    }
    out
}

impl BatchSource for InMemorySource {
    fn batch_count(&mut self, _epoch: usize) -> Result<usize> {
        Ok(batch_ranges(self.samples.len(), self.batch_size).len())
    }

    fn batch(&mut self, epoch: usize, index: usize) -> Result<Batch> {
        let range = batch_ranges(self.samples.len(), self.batch_size)
            .into_iter()
            .nth(index)
            .ok_or_else(|| Error::Config(format!("batch {index} out of range")))?;
        let idx = self.order(epoch)[range].to_vec();
        let samples: Vec<Tensor> = idx.iter().map(|&i| self.samples[i].clone()).collect();
        Ok(Batch {
            inputs: Activations::from_samples(&samples)?,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        })
    }
}

/// Held-out samples used for early stopping.
#[derive(Debug, Clone)]
pub struct ValidationSet {
    pub inputs: Activations,
    pub labels: Vec<f64>,
}

impl ValidationSet {
    pub fn new(samples: &[Tensor], labels: Vec<f64>) -> Result<Self> {
        let inputs = Activations::from_samples(samples)?;
        if inputs.batch != labels.len() {
            return Err(Error::ShapeMismatch("validation labels do not match samples".into()));
        }
        let pos = labels.iter().filter(|&&l| l > 0.5).count();
        if pos == 0 || pos == labels.len() {
            return Err(Error::SingleClass);
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Logits of a large batch, evaluated in chunks.
pub fn infer_in_chunks(net: &Network, inputs: &Activations, chunk: usize) -> Result<Vec<f64>> {
    let len = inputs.sample_len();
    let mut out = Vec::with_capacity(inputs.batch);
    for start in (0..inputs.batch).step_by(chunk.max(1)) {
        let end = (start + chunk.max(1)).min(inputs.batch);
        let part = Activations {
            batch: end - start,
            data: inputs.data[start * len..end * len].to_vec(),
            ..inputs.clone()
        };
        out.extend(net.forward_infer(&part)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Non-improving epochs tolerated before stopping; 0 behaves like 1.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            batch_size: 64,
            max_epochs: 100,
            patience: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.adam.validate()?;
        if self.batch_size < 2 {
            return Err(Error::Config("batch size must be at least 2".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max epochs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_auc: f64,
}

/// Bookkeeping that survives a resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainProgress {
    pub epochs_done: usize,
    pub best_auc: f64,
    pub best_epoch: usize,
    pub stale_epochs: usize,
    pub stopped_early: bool,
    pub history: Vec<EpochRecord>,
}

impl Default for TrainProgress {
    fn default() -> Self {
        Self {
            epochs_done: 0,
            best_auc: f64::NEG_INFINITY,
            best_epoch: 0,
            stale_epochs: 0,
            stopped_early: false,
            history: Vec::new(),
        }
    }
}

/// Training run state: the current network and optimizer plus the best
/// network seen so far.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub config: TrainConfig,
    pub current: Network,
    pub adam: Adam,
    pub best: Network,
    pub progress: TrainProgress,
}

impl Trainer {
    pub fn new(mut net: Network, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let adam = Adam::new(config.adam, &mut net);
        Ok(Self {
            config,
            best: net.clone(),
            current: net,
            adam,
            progress: TrainProgress::default(),
        })
    }

    pub fn resume(
        current: Network,
        adam: Adam,
        best: Network,
        progress: TrainProgress,
        config: TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            current,
            adam,
            best,
            progress,
        })
    }

    pub fn finished(&self) -> bool {
        self.progress.stopped_early || self.progress.epochs_done >= self.config.max_epochs
    }

    /// Trains one epoch and updates the early-stopping state.
    pub fn step_epoch(&mut self, source: &mut dyn BatchSource, val: &ValidationSet) -> Result<EpochRecord> {
        let epoch = self.progress.epochs_done;
        let batches = source.batch_count(epoch)?;
        if batches == 0 {
            return Err(Error::EmptyInput("training batches"));
        }
        let diverged = |loss: f64| Error::Divergence {
            epoch: epoch + 1,
            loss,
        };
        let mut total = 0.0;
        let mut count = 0usize;
        for i in 0..batches {
            let batch = source.batch(epoch, i)?;
            self.current.zero_grad();
            let tape = match self.current.forward_train(&batch.inputs) {
                Err(Error::NonFinite(_)) => return Err(diverged(f64::NAN)),
                other => other?,
            };
            let (loss, grad) = loss_bce(&tape.logits, &batch.labels)?;
            if !loss.is_finite() {
                return Err(diverged(loss));
            }
            self.current.backward(&tape, &grad)?;
            self.adam.update(&mut self.current);
            total += loss * batch.labels.len() as f64;
            count += batch.labels.len();
        }
        let train_loss = total / count as f64;

        let logits = match infer_in_chunks(&self.current, &val.inputs, 256) {
            Err(Error::NonFinite(_)) => return Err(diverged(f64::NAN)),
            other => other?,
        };
        let (val_loss, _) = loss_bce(&logits, &val.labels)?;
        let labels: Vec<bool> = val.labels.iter().map(|&l| l > 0.5).collect();
        let val_auc = roc_auc(&logits, &labels)?;

        let record = EpochRecord {
            epoch: epoch + 1,
            train_loss,
            val_loss,
            val_auc,
        };
        let p = &mut self.progress;
        p.epochs_done += 1;
        if val_auc > p.best_auc {
            p.best_auc = val_auc;
            p.best_epoch = epoch + 1;
            p.stale_epochs = 0;
            self.best = self.current.clone();
        } else {
            p.stale_epochs += 1;
            if p.stale_epochs >= self.config.patience.max(1) {
                p.stopped_early = true;
            }
        }
        p.history.push(record.clone());
        Ok(record)
    }

    /// Runs epochs until early stopping or the epoch limit.
    pub fn run(
        &mut self,
        source: &mut dyn BatchSource,
        val: &ValidationSet,
        observer: &mut dyn FnMut(&EpochRecord),
    ) -> Result<()> {
        while !self.finished() {
            let r = self.step_epoch(source, val)?;
            observer(&r);
        }
        Ok(())
    }
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    pub progress: TrainProgress,
}

/// Trains from scratch and returns the best-validation network.
pub fn train(
    net: Network,
    source: &mut dyn BatchSource,
    val: &ValidationSet,
    config: TrainConfig,
) -> Result<TrainOutcome> {
    let mut t = Trainer::new(net, config)?;
    t.run(source, val, &mut |_| {})?;
    Ok(TrainOutcome {
        network: t.best,
        progress: t.progress,
    })
}
