//! Synthetic received-signal generation from a discrete multipath model.

mod config;
pub mod motion;
pub mod pulse;
pub mod scene;
pub mod scene_file;
pub mod synth;

pub use config::RadarConfig;
pub use motion::{motion_trajectory, MotionKind, MotionModel, MotionState};
pub use pulse::{raised_cosine_pulse, raised_cosine_response};
pub use scene::{simulate_received, PathComponent, Scene};
pub use scene_file::SceneFile;
pub use synth::{random_scene, synth_dataset, synth_dataset_with, SynthSpec};
