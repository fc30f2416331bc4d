//! Binary per-sample container.
//!
//! Layout, all little-endian:
//!
//! | offset | type      | content                                  |
//! |--------|-----------|------------------------------------------|
//! | 0      | `[u8; 4]` | magic `UWBC`                             |
//! | 4      | `u32`     | format version (1)                       |
//! | 8      | `u32`     | `N`, fast-time samples                   |
//! | 12     | `u32`     | `M`, slow-time repetitions               |
//! | 16     | `f32` x 2NM | `(re, im)` pairs, fast time fastest    |

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::radar::ComplexMatrix;

pub const MAGIC: &[u8; 4] = b"UWBC";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

pub fn encode(matrix: &ComplexMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * matrix.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(matrix.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(matrix.cols() as u32).to_le_bytes());
    for z in matrix.as_slice() {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<ComplexMatrix> {
    let corrupt = |reason: &str| Error::CorruptHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < HEADER_LEN {
        return Err(corrupt("file shorter than the 16-byte header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let (n, m) = (word(8) as usize, word(12) as usize);
    let expected = n
        .checked_mul(m)
        .and_then(|nm| nm.checked_mul(8))
        .ok_or_else(|| corrupt("dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::FileShapeMismatch {
            path: path.to_path_buf(),
            reason: format!(
                "header declares {n}x{m} ({expected} bytes) but payload has {} bytes",
                payload.len()
            ),
        });
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[..4].try_into().unwrap());
            let im = f32::from_le_bytes(c[4..].try_into().unwrap());
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    ComplexMatrix::from_column_major(n, m, data)
}

pub fn write(path: &Path, matrix: &ComplexMatrix) -> Result<()> {
    std::fs::write(path, encode(matrix)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<ComplexMatrix> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComplexMatrix {
        let data = (0..6).map(|i| Complex64::new(i as f64 * 0.5, -(i as f64))).collect();
        ComplexMatrix::from_column_major(2, 3, data).unwrap()
    }

    #[test]
    fn layout_is_fixed() {
        let bytes = encode(&sample());
        assert_eq!(&bytes[..4], b"UWBC");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &3u32.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 6 * 8);
        // second value: (0.5, -1.0) at row 1 of column 0
        assert_eq!(&bytes[24..28], &0.5f32.to_le_bytes());
        assert_eq!(&bytes[28..32], &(-1.0f32).to_le_bytes());
    }

    #[test]
    fn truncation_and_bad_magic() {
        let p = Path::new("x.cir");
        let mut bytes = encode(&sample());
        bytes.pop();
        let err = decode(&bytes, p).unwrap_err();
        assert!(matches!(err, Error::FileShapeMismatch { .. }));
        assert!(err.to_string().contains("x.cir"));
        let mut bad = encode(&sample());
        bad[0] = b'X';
        assert!(matches!(decode(&bad, p), Err(Error::CorruptHeader { .. })));
        assert!(matches!(decode(&bad[..10], p), Err(Error::CorruptHeader { .. })));
    }

    #[test]
    fn decode_inverts_encode() {
        let m = sample();
        assert_eq!(decode(&encode(&m), Path::new("a")).unwrap(), m);
    }
}
