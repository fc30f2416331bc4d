//! Car-occupancy detection from ultra-wideband radar channel impulse
//! responses.
//!
//! The pipeline: CIR frames ([`radar`]) are simulated ([`simulator`]) or
//! read from disk ([`ingest`]), mean-removed, corrupted with noise at a
//! controlled SNR and normalized ([`augment`]), then scored by residual
//! convolutional networks ([`neural`]) or classical detectors
//! ([`baseline`]). [`eval`] turns scores into AUC sweeps and reports.

pub mod augment;
pub mod baseline;
pub mod cli;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod neural;
pub mod pipeline;
pub mod radar;
pub mod seed;
pub mod simulator;

pub use error::{Error, Result};
