//! Binary field snapshots.
//!
//! Layout (little endian): a 32-byte header
//!
//! | offset | type  | content          |
//! |--------|-------|------------------|
//! | 0      | [u8;4]| `b"SQGF"`        |
//! | 4      | u32   | version (1)      |
//! | 8      | u32   | n                |
//! | 12     | u32   | reserved, 0      |
//! | 16     | f64   | box length L     |
//! | 24     | f64   | time t           |
//!
//! followed by `n²` f64 samples in row-major order (`x2` index outer).

use std::fs;
use std::path::Path;

use super::field::Field;
use super::grid::Grid2D;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SQGF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub field: Field,
    pub t: f64,
}

pub fn encode(field: &Field, t: f64) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&g.length().to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for v in field.physical() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "snapshot is {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic, expected SQGF".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let n = u32_at(8) as usize;
    let grid = Grid2D::new(n, f64_at(16))?;
    let t = f64_at(24);
    let expected = HEADER_LEN + 8 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "snapshot for n={n} must be {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let samples = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Snapshot {
        field: Field::from_physical(grid, samples)?,
        t,
    })
}

pub fn write(path: &Path, field: &Field, t: f64) -> Result<()> {
    fs::write(path, encode(field, t)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = Grid2D::new(16, 3.5).unwrap();
        let u = Field::from_fn(g, |x, y| (x * 1.7).sin() * (y * 0.9).cos() + 0.25).unwrap();
        let bytes = encode(&u, 0.125);
        assert_eq!(bytes.len(), 32 + 8 * 256);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.t, 0.125);
        assert_eq!(back.field.grid(), u.grid());
        for (a, b) in back.field.physical().iter().zip(u.physical()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let mut bytes = encode(&Field::zeros(g), 0.0);
        assert!(decode(&bytes[..20]).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    }
}
