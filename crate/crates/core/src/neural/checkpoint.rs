//! Checkpoint files.
//!
//! Layout: magic `UWBK`, `u32` version, `u64` header length, a JSON header,
//! then the payload as contiguous little-endian floats (`f32` unless the
//! header says `f64`). The payload holds every tensor of
//! [`Network::state`] in that order (per convolution weight `[out][in][kh][kw]`
//! then bias; per batch norm gamma, beta, running mean, running variance;
//! head weight then bias), followed by the optimizer moments if present.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arch::ArchitectureVariant;
use super::network::{build_network, Network};
use super::optim::{Adam, AdamConfig};
use super::train::TrainProgress;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"UWBK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub variant: ArchitectureVariant,
    pub input_shape: [usize; 3],
    pub init_seed: u64,
    pub precision: Precision,
    pub tensors: Vec<TensorEntry>,
    /// Resolved training configuration, free-form.
    #[serde(default)]
    pub training: serde_json::Value,
    /// Summary metrics, free-form.
    #[serde(default)]
    pub metrics: serde_json::Value,
    #[serde(default)]
    pub progress: Option<TrainProgress>,
    #[serde(default)]
    pub optimizer: Option<OptimizerHeader>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerHeader {
    pub config: AdamConfig,
    pub step: u64,
    pub len: usize,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub network: Network,
    pub optimizer: Option<Adam>,
}

/// Free-form metadata stored alongside the weights.
#[derive(Debug, Clone, Default)]
pub struct CheckpointMeta {
    pub training: serde_json::Value,
    pub metrics: serde_json::Value,
    pub progress: Option<TrainProgress>,
}

pub fn encode_checkpoint(
    net: &Network,
    optimizer: Option<&Adam>,
    meta: &CheckpointMeta,
    precision: Precision,
) -> Result<Vec<u8>> {
    let state = net.state();
    let opt_values = optimizer.map(Adam::flat_state);
    let header = CheckpointHeader {
        variant: net.variant.clone(),
        input_shape: net.input_shape,
        init_seed: net.seed,
        precision,
        tensors: state
            .iter()
            .map(|(name, v)| TensorEntry {
                name: name.clone(),
                len: v.len(),
            })
            .collect(),
        training: meta.training.clone(),
        metrics: meta.metrics.clone(),
        progress: meta.progress.clone(),
        optimizer: optimizer.zip(opt_values.as_ref()).map(|(a, v)| OptimizerHeader {
            config: a.config,
            step: a.step,
            len: v.len(),
        }),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    let values = state
        .iter()
        .flat_map(|(_, v)| v.iter())
        .chain(opt_values.iter().flatten());
    for &x in values {
        match precision {
            Precision::F32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
            Precision::F64 => out.extend_from_slice(&x.to_le_bytes()),
        }
    }
    Ok(out)
}

pub fn decode_checkpoint(bytes: &[u8], path: &Path) -> Result<Checkpoint> {
    let corrupt = |reason: String| Error::CorruptHeader {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < 16 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(corrupt("not a checkpoint file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    if hlen > body.len() {
        return Err(corrupt("header length exceeds file size".into()));
    }
    let header: CheckpointHeader =
        serde_json::from_slice(&body[..hlen]).map_err(|e| corrupt(format!("bad header: {e}")))?;
    let payload = &body[hlen..];

    let mut network = build_network(&header.variant, header.input_shape, header.init_seed)
        .map_err(|e| corrupt(format!("cannot rebuild network: {e}")))?;
    let width = match header.precision {
        Precision::F32 => 4,
        Precision::F64 => 8,
    };
    let opt_len = header.optimizer.map_or(0, |o| o.len);
    let expected = (network.state_len() + opt_len) * width;
    if payload.len() != expected {
        return Err(Error::FileShapeMismatch {
            path: path.to_path_buf(),
            reason: format!("payload has {} bytes, expected {expected}", payload.len()),
        });
    }
    let mut values = payload.chunks_exact(width).map(|c| match header.precision {
        Precision::F32 => f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64,
        Precision::F64 => f64::from_le_bytes(c.try_into().expect("8 bytes")),
    });
    {
        let state = network.state_mut();
        if state.len() != header.tensors.len() {
            return Err(corrupt("tensor list does not match the architecture".into()));
        }
        for ((name, dst), entry) in state.into_iter().zip(&header.tensors) {
            if name != entry.name || dst.len() != entry.len {
                return Err(corrupt(format!("unexpected tensor {} ({})", entry.name, entry.len)));
            }
            for d in dst.iter_mut() {
                *d = values.next().expect("length checked");
            }
        }
    }
    let optimizer = match header.optimizer {
        Some(o) => {
            let mut adam = Adam::new(o.config, &mut network);
            let rest: Vec<f64> = values.collect();
            adam.load_flat_state(o.step, &rest)
                .map_err(|e| corrupt(e.to_string()))?;
            Some(adam)
        }
        None => None,
    };
    Ok(Checkpoint {
        header,
        network,
        optimizer,
    })
}

pub fn save_checkpoint(
    path: &Path,
    net: &Network,
    optimizer: Option<&Adam>,
    meta: &CheckpointMeta,
    precision: Precision,
) -> Result<()> {
    let bytes = encode_checkpoint(net, optimizer, meta, precision)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingCheckpoint(path.display().to_string()),
        _ => Error::io(path, e),
    })?;
    decode_checkpoint(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::arch::Dimensionality;

    fn net() -> Network {
        let v = ArchitectureVariant::custom("ck", Dimensionality::OneD, 3, 1, 2).unwrap();
        let mut n = build_network(&v, [4, 1, 6], 9).unwrap();
        n.blocks[1].second.bn.running_var[2] = 0.3;
        n.head.bias = -0.125;
        n
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let mut n = net();
        let mut adam = Adam::new(AdamConfig::default(), &mut n);
        adam.step = 7;
        adam.m[0][1] = 0.5;
        let meta = CheckpointMeta {
            metrics: serde_json::json!({"val_auc": 0.75}),
            ..CheckpointMeta::default()
        };
        let bytes = encode_checkpoint(&n, Some(&adam), &meta, Precision::F64).unwrap();
        let ck = decode_checkpoint(&bytes, Path::new("x")).unwrap();
        assert_eq!(ck.network, n);
        assert_eq!(ck.optimizer.unwrap(), adam);
        assert_eq!(ck.header.metrics["val_auc"], 0.75);
    }

    #[test]
    fn f32_round_trip_is_single_precision() {
        let n = net();
        let bytes = encode_checkpoint(&n, None, &CheckpointMeta::default(), Precision::F32).unwrap();
        let ck = decode_checkpoint(&bytes, Path::new("x")).unwrap();
        for ((_, a), (_, b)) in n.state().iter().zip(ck.network.state()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(*x as f32 as f64, *y);
            }
        }
        assert!(ck.optimizer.is_none());
    }

    #[test]
    fn damaged_files_are_rejected() {
        let n = net();
        let bytes = encode_checkpoint(&n, None, &CheckpointMeta::default(), Precision::F32).unwrap();
        let p = Path::new("x");
        assert!(matches!(decode_checkpoint(&bytes[..bytes.len() - 2], p), Err(Error::FileShapeMismatch { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_checkpoint(&bad, p), Err(Error::CorruptHeader { .. })));
        assert!(matches!(
            load_checkpoint(Path::new("/nonexistent/ck.uwbk")),
            Err(Error::MissingCheckpoint(_))
        ));
    }
}
