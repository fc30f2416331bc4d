//! Car-disjoint train/validation/test assignment.
//!
//! Occupied records of the training car go to training, except the last
//! few per class which are held out for validation. Occupied records of the
//! evaluation car are split into the last `test_per_class` (test) and the
//! rest (validation). Empty-car records are split in order into train,
//! validation and test blocks. "Last" is taken in (participant, recording,
//! segment index) order within a class.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::manifest::{DatasetManifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::radar::ActivityLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_car: String,
    pub eval_car: String,
    pub test_per_class: usize,
    /// Training-car records per occupied class held out for validation.
    pub train_car_validation: BTreeMap<ActivityLabel, usize>,
    pub empty_validation: usize,
    pub empty_test: usize,
}

impl Default for SplitConfig {
    /// The published protocol: Car 1 trains, Car 2 validates and tests,
    /// 150 test samples per occupied class, empty car 66/100/20.
    fn default() -> Self {
        Self {
            train_car: "1".into(),
            eval_car: "2".into(),
            test_per_class: 150,
            train_car_validation: [
                (ActivityLabel::Breathing, 144),
                (ActivityLabel::Talking, 145),
                (ActivityLabel::Moving, 161),
            ]
            .into_iter()
            .collect(),
            empty_validation: 100,
            empty_test: 20,
        }
    }
}

impl SplitConfig {
    pub fn holdout(&self, label: ActivityLabel) -> usize {
        self.train_car_validation.get(&label).copied().unwrap_or(0)
    }
}

/// Partition of every manifest record, index-aligned with the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub partitions: Vec<Partition>,
}

impl SplitAssignment {
    pub fn indices(&self, part: Partition) -> Vec<usize> {
        self.partitions
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == part)
            .map(|(i, _)| i)
            .collect()
    }

    /// Record count per (label, partition).
    pub fn counts(&self, manifest: &DatasetManifest) -> BTreeMap<(ActivityLabel, Partition), usize> {
        let mut out = BTreeMap::new();
        for (r, p) in manifest.records.iter().zip(&self.partitions) {
            *out.entry((r.label, *p)).or_insert(0) += 1;
        }
        out
    }
}

fn order_key(e: &ManifestEntry) -> (&str, &str, usize) {
    (
        e.provenance.participant.as_deref().unwrap_or(""),
        e.provenance.recording.as_str(),
        e.provenance.segment_index,
    )
}

/// Indices of `label` records from `car` (any car when `None`), in split order.
fn ordered(manifest: &DatasetManifest, label: ActivityLabel, car: Option<&str>) -> Vec<usize> {
    let mut idx: Vec<usize> = manifest
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label == label && car.is_none_or(|c| r.provenance.car == c))
        .map(|(i, _)| i)
        .collect();
    idx.sort_by(|&a, &b| order_key(&manifest.records[a]).cmp(&order_key(&manifest.records[b])));
    idx
}

fn insufficient(label: ActivityLabel, needed: usize, available: usize) -> Error {
    Error::InsufficientSamples {
        label,
        needed,
        available,
    }
}

pub fn make_split(manifest: &DatasetManifest, cfg: &SplitConfig) -> Result<SplitAssignment> {
    let mut parts: Vec<Option<Partition>> = vec![None; manifest.records.len()];

    for (i, r) in manifest.records.iter().enumerate() {
        let car = r.provenance.car.as_str();
        if r.label.is_occupied() && car != cfg.train_car && car != cfg.eval_car {
            return Err(Error::Config(format!(
                "record {i} ({}) belongs to car {car:?}, expected {:?} or {:?}",
                r.file, cfg.train_car, cfg.eval_car
            )));
        }
    }

    for label in ActivityLabel::OCCUPIED {
        // classes absent from the dataset are skipped rather than required
        if !manifest.records.iter().any(|r| r.label == label) {
            continue;
        }
        let train = ordered(manifest, label, Some(&cfg.train_car));
        let hold = cfg.holdout(label);
        if train.len() < hold {
            return Err(insufficient(label, hold, train.len()));
        }
        let cut = train.len() - hold;
        for (k, &i) in train.iter().enumerate() {
            parts[i] = Some(if k < cut { Partition::Train } else { Partition::Validation });
        }

        let eval = ordered(manifest, label, Some(&cfg.eval_car));
        if eval.len() < cfg.test_per_class {
            return Err(insufficient(label, cfg.test_per_class, eval.len()));
        }
        let cut = eval.len() - cfg.test_per_class;
        for (k, &i) in eval.iter().enumerate() {
            parts[i] = Some(if k < cut { Partition::Validation } else { Partition::Test });
        }
    }

    let empty = ordered(manifest, ActivityLabel::Empty, None);
    let held = cfg.empty_validation + cfg.empty_test;
    if empty.len() < held {
        return Err(insufficient(ActivityLabel::Empty, held, empty.len()));
    }
    let train_end = empty.len() - held;
    let val_end = train_end + cfg.empty_validation;
    for (k, &i) in empty.iter().enumerate() {
        parts[i] = Some(if k < train_end {
            Partition::Train
        } else if k < val_end {
            Partition::Validation
        } else {
            Partition::Test
        });
    }

    Ok(SplitAssignment {
        partitions: parts
            .into_iter()
            .map(|p| p.expect("every record is assigned"))
            .collect(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::radar::Provenance;
    use crate::simulator::RadarConfig;

    pub(crate) fn entry(i: usize, label: ActivityLabel, car: &str, participant: usize) -> ManifestEntry {
        ManifestEntry {
            file: format!("samples/{i:06}.cir"),
            label,
            provenance: Provenance {
                car: car.into(),
                seat: label.is_occupied().then(|| "front".into()),
                participant: label.is_occupied().then(|| format!("p{participant:02}")),
                recording: format!("{car}-{label}"),
                segment_index: i,
            },
        }
    }

    /// Manifest with the per-car, per-class sample counts of the public dataset.
    pub(crate) fn table3_manifest() -> DatasetManifest {
        let plan = [
            (ActivityLabel::Breathing, "1", 368 + 144),
            (ActivityLabel::Talking, "1", 367 + 145),
            (ActivityLabel::Moving, "1", 380 + 161),
            (ActivityLabel::Breathing, "2", 409 + 150),
            (ActivityLabel::Talking, "2", 406 + 150),
            (ActivityLabel::Moving, "2", 410 + 150),
            (ActivityLabel::Empty, "2", 66 + 100 + 20),
        ];
        let mut records = Vec::new();
        for (label, car, n) in plan {
            for k in 0..n {
                let i = records.len();
                records.push(entry(i, label, car, k / 12));
            }
        }
        DatasetManifest {
            format_version: 1,
            radar: RadarConfig::default(),
            records,
        }
    }

    #[test]
    fn reproduces_table_counts() {
        let m = table3_manifest();
        let split = make_split(&m, &SplitConfig::default()).unwrap();
        let counts = split.counts(&m);
        let get = |l, p| counts.get(&(l, p)).copied().unwrap_or(0);
        use ActivityLabel::*;
        use Partition::*;
        for (label, train, val, test) in [
            (Breathing, 368, 144 + 409, 150),
            (Talking, 367, 145 + 406, 150),
            (Moving, 380, 161 + 410, 150),
            (Empty, 66, 100, 20),
        ] {
            assert_eq!(get(label, Train), train, "{label} train");
            assert_eq!(get(label, Validation), val, "{label} val");
            assert_eq!(get(label, Test), test, "{label} test");
        }
    }

    #[test]
    fn cars_stay_disjoint() {
        let m = table3_manifest();
        let split = make_split(&m, &SplitConfig::default()).unwrap();
        for (r, p) in m.records.iter().zip(&split.partitions) {
            if *p == Partition::Train && r.label.is_occupied() {
                assert_eq!(r.provenance.car, "1");
            }
            if *p == Partition::Test {
                assert_eq!(r.provenance.car, "2");
            }
        }
    }

    #[test]
    fn test_block_is_the_last_in_order() {
        let m = table3_manifest();
        let split = make_split(&m, &SplitConfig::default()).unwrap();
        let idx = ordered(&m, ActivityLabel::Talking, Some("2"));
        let tail: Vec<_> = idx[idx.len() - 150..].iter().map(|&i| split.partitions[i]).collect();
        assert!(tail.iter().all(|p| *p == Partition::Test));
        assert_eq!(split.partitions[idx[idx.len() - 151]], Partition::Validation);
    }

    #[test]
    fn car1_only_manifest_is_insufficient() {
        let mut m = table3_manifest();
        m.records.retain(|r| r.provenance.car == "1");
        let err = make_split(&m, &SplitConfig::default()).unwrap_err();
        match err {
            Error::InsufficientSamples { label, needed, available } => {
                assert_eq!(label, ActivityLabel::Breathing);
                assert_eq!((needed, available), (150, 0));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn absent_class_is_skipped() {
        let mut m = table3_manifest();
        m.records.retain(|r| r.label != ActivityLabel::Talking);
        let split = make_split(&m, &SplitConfig::default()).unwrap();
        assert_eq!(split.partitions.len(), m.records.len());
        assert!(split.indices(Partition::Test).iter().all(|&i| m.records[i].label != ActivityLabel::Talking));
    }

    #[test]
    fn split_is_deterministic() {
        let m = table3_manifest();
        let a = make_split(&m, &SplitConfig::default()).unwrap();
        let b = make_split(&m, &SplitConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_car_is_rejected() {
        let mut m = table3_manifest();
        m.records[0].provenance.car = "3".into();
        assert!(matches!(make_split(&m, &SplitConfig::default()), Err(Error::Config(_))));
    }
}
