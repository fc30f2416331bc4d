use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cir_file;
use crate::error::{Error, Result};
use crate::radar::{ActivityLabel, CirMatrix, Provenance, SampleRecord};
use crate::simulator::RadarConfig;

pub const MANIFEST_VERSION: u32 = 1;

/// One manifest row; `file` is relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub label: ActivityLabel,
    #[serde(flatten)]
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub radar: RadarConfig,
    pub records: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != MANIFEST_VERSION {
            return Err(Error::Parse(format!(
                "unsupported manifest version {}",
                self.format_version
            )));
        }
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.file.as_str()) {
                return Err(Error::Parse(format!("duplicate file {:?} in manifest", r.file)));
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<ActivityLabel> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let m: DatasetManifest =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Directory holding a manifest path's sample files.
pub fn dataset_root(manifest_path: &Path) -> PathBuf {
    manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes every record as `samples/NNNNNN.cir` next to the manifest.
pub fn write_dataset(
    records: &[SampleRecord],
    radar: &RadarConfig,
    manifest_path: &Path,
) -> Result<DatasetManifest> {
    let root = dataset_root(manifest_path);
    let samples = root.join("samples");
    std::fs::create_dir_all(&samples).map_err(|e| Error::io(&samples, e))?;
    let mut entries = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        if rec.cir.n_fast() != radar.n_fast {
            return Err(Error::ShapeMismatch(format!(
                "record {i} has {} fast-time samples, radar config says {}",
                rec.cir.n_fast(),
                radar.n_fast
            )));
        }
        let file = format!("samples/{i:06}.cir");
        cir_file::write(&root.join(&file), rec.cir.matrix())?;
        entries.push(ManifestEntry {
            file,
            label: rec.label,
            provenance: rec.provenance.clone(),
        });
    }
    let manifest = DatasetManifest {
        format_version: MANIFEST_VERSION,
        radar: *radar,
        records: entries,
    };
    std::fs::write(manifest_path, manifest.to_json()).map_err(|e| Error::io(manifest_path, e))?;
    Ok(manifest)
}

/// Loads one manifest entry's matrix.
pub fn read_record(root: &Path, radar: &RadarConfig, entry: &ManifestEntry) -> Result<SampleRecord> {
    let path = root.join(&entry.file);
    let matrix = cir_file::read(&path)?;
    if matrix.rows() != radar.n_fast {
        return Err(Error::FileShapeMismatch {
            path,
            reason: format!(
                "{} fast-time samples, manifest radar config says {}",
                matrix.rows(),
                radar.n_fast
            ),
        });
    }
    let cir = CirMatrix::new(matrix, radar.t_ft, radar.t_st).map_err(|e| Error::FileShapeMismatch {
        path: root.join(&entry.file),
        reason: e.to_string(),
    })?;
    Ok(SampleRecord::new(cir, entry.label, entry.provenance.clone()))
}

pub fn read_dataset(manifest_path: &Path) -> Result<(DatasetManifest, Vec<SampleRecord>)> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let root = dataset_root(manifest_path);
    let records = manifest
        .records
        .iter()
        .map(|e| read_record(&root, &manifest.radar, e))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, records))
}
