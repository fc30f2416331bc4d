use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::split::{Partition, SplitAssignment};
use crate::error::{Error, Result};
use crate::radar::ActivityLabel;

/// Draws per training record per epoch, by class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReuseFactors {
    pub occupied: usize,
    pub empty: usize,
}

impl Default for ReuseFactors {
    fn default() -> Self {
        Self {
            occupied: 200,
            empty: 3000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanEntry {
    /// Index into the manifest / record list.
    pub record: usize,
    /// Which of the record's draws this is, `0..reuse`.
    pub draw: u32,
}

/// Shuffled list of training draws for one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochPlan {
    pub entries: Vec<PlanEntry>,
    pub reuse: ReuseFactors,
}

impl EpochPlan {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn build_epoch_plan(
    labels: &[ActivityLabel],
    split: &SplitAssignment,
    reuse: ReuseFactors,
    seed: u64,
) -> Result<EpochPlan> {
    let train: Vec<usize> = split
        .indices(Partition::Train)
        .into_iter()
        .filter(|&i| i < labels.len())
        .collect();
    if !train.iter().any(|&i| labels[i].is_occupied()) {
        return Err(Error::EmptyClass("occupied"));
    }
    if !train.iter().any(|&i| labels[i] == ActivityLabel::Empty) {
        return Err(Error::EmptyClass("empty"));
    }
    let mut entries = Vec::new();
    for &record in &train {
        let times = if labels[record].is_occupied() {
            reuse.occupied
        } else {
            reuse.empty
        };
        entries.extend((0..times as u32).map(|draw| PlanEntry { record, draw }));
    }
    entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(EpochPlan { entries, reuse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::split::{make_split, tests::table3_manifest, SplitConfig};
    use std::collections::HashMap;

    #[test]
    fn table_sized_plan_length_and_multiplicity() {
        let m = table3_manifest();
        let split = make_split(&m, &SplitConfig::default()).unwrap();
        let labels = m.labels();
        let plan = build_epoch_plan(&labels, &split, ReuseFactors::default(), 7).unwrap();
        assert_eq!(plan.len(), (368 + 367 + 380) * 200 + 66 * 3000);
        assert_eq!(plan.len(), 421_000);
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for e in &plan.entries {
            *seen.entry(e.record).or_default() += 1;
        }
        for (rec, n) in seen {
            assert_eq!(split.partitions[rec], Partition::Train);
            let want = if labels[rec].is_occupied() { 200 } else { 3000 };
            assert_eq!(n, want);
        }
        let empty_draws = plan.entries.iter().filter(|e| !labels[e.record].is_occupied()).count();
        let occ_draws = plan.len() - empty_draws;
        assert_eq!(empty_draws * 200 * 1115, occ_draws * 3000 * 66);
    }

    #[test]
    fn minimal_plan() {
        let labels = [ActivityLabel::Breathing, ActivityLabel::Empty];
        let split = SplitAssignment {
            partitions: vec![Partition::Train, Partition::Train],
        };
        let plan = build_epoch_plan(&labels, &split, ReuseFactors::default(), 1).unwrap();
        assert_eq!(plan.len(), 3200);
        let again = build_epoch_plan(&labels, &split, ReuseFactors::default(), 1).unwrap();
        assert_eq!(plan, again);
        let other = build_epoch_plan(&labels, &split, ReuseFactors::default(), 2).unwrap();
        assert_ne!(plan.entries, other.entries);
    }

    #[test]
    fn missing_class_is_an_error() {
        let labels = [ActivityLabel::Breathing, ActivityLabel::Empty];
        let split = SplitAssignment {
            partitions: vec![Partition::Train, Partition::Test],
        };
        assert!(matches!(
            build_epoch_plan(&labels, &split, ReuseFactors::default(), 1),
            Err(Error::EmptyClass("empty"))
        ));
    }
}
