//! On-disk dataset container, segmentation, car-disjoint split and epoch
//! planning.

pub mod cir_file;
pub mod import;
pub mod manifest;
pub mod plan;
pub mod segment;
pub mod split;

pub use import::{import_recordings, CirStreamSource, Recording, RecordingSource};
pub use manifest::{read_dataset, write_dataset, DatasetManifest, ManifestEntry};
pub use plan::{build_epoch_plan, EpochPlan, PlanEntry, ReuseFactors};
pub use segment::{segment_recording, DEFAULT_WINDOW_S};
pub use split::{make_split, Partition, SplitAssignment, SplitConfig};
