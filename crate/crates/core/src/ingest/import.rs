//! Import of full-length recordings into the canonical container.
//!
//! [`RecordingSource`] is the extension point for other on-disk formats: an
//! adapter yields whole recordings with their metadata, and
//! [`import_recordings`] segments and stores them.

use std::path::{Path, PathBuf};

use super::cir_file;
use super::manifest::{read_dataset, write_dataset, DatasetManifest};
use super::segment::segment_recording;
use crate::error::{Error, Result};
use crate::radar::{ActivityLabel, CirMatrix, Provenance, SampleRecord};
use crate::simulator::RadarConfig;

/// A continuous recording of one activity.
#[derive(Debug, Clone)]
pub struct Recording {
    pub cir: CirMatrix,
    pub label: ActivityLabel,
    /// `segment_index` is ignored; segments are numbered on import.
    pub provenance: Provenance,
}

pub trait RecordingSource {
    fn recordings(&self) -> Result<Vec<Recording>>;
}

/// A single long `.cir` file plus metadata given by the caller.
#[derive(Debug, Clone)]
pub struct CirStreamSource {
    pub path: PathBuf,
    pub label: ActivityLabel,
    pub provenance: Provenance,
    pub t_ft: f64,
    pub t_st: f64,
}

impl RecordingSource for CirStreamSource {
    fn recordings(&self) -> Result<Vec<Recording>> {
        let matrix = cir_file::read(&self.path)?;
        let cir = CirMatrix::new(matrix, self.t_ft, self.t_st).map_err(|e| Error::FileShapeMismatch {
            path: self.path.clone(),
            reason: e.to_string(),
        })?;
        let mut provenance = self.provenance.clone();
        if provenance.recording.is_empty() {
            provenance.recording = self
                .path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(vec![Recording {
            cir,
            label: self.label,
            provenance,
        }])
    }
}

/// Segments every recording of `source` and appends the samples to the
/// dataset at `manifest_path`, creating it if needed. Returns the manifest
/// and the number of samples added.
pub fn import_recordings(
    source: &dyn RecordingSource,
    window_s: f64,
    radar: &RadarConfig,
    manifest_path: &Path,
) -> Result<(DatasetManifest, usize)> {
    let mut records: Vec<SampleRecord> = if manifest_path.exists() {
        let (existing, records) = read_dataset(manifest_path)?;
        if existing.radar.n_fast != radar.n_fast {
            return Err(Error::ShapeMismatch(format!(
                "dataset has {} fast-time samples, import has {}",
                existing.radar.n_fast, radar.n_fast
            )));
        }
        records
    } else {
        Vec::new()
    };
    let before = records.len();
    for rec in source.recordings()? {
        if rec.cir.n_fast() != radar.n_fast {
            return Err(Error::ShapeMismatch(format!(
                "recording {:?} has {} fast-time samples, expected {}",
                rec.provenance.recording,
                rec.cir.n_fast(),
                radar.n_fast
            )));
        }
        records.extend(segment_recording(&rec.cir, window_s, rec.label, &rec.provenance)?);
    }
    let added = records.len() - before;
    let radar = RadarConfig {
        m_slow: crate::ingest::segment::window_columns(window_s, radar.t_st)?,
        ..*radar
    };
    let manifest = write_dataset(&records, &radar, manifest_path)?;
    Ok((manifest, added))
}
