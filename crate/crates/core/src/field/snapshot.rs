//! Flat binary snapshots of field values.
//!
//! Layout (all little-endian):
//!
//! | offset | size | field                |
//! |--------|------|----------------------|
//! | 0      | 8    | magic `GMCSNAP1`     |
//! | 8      | 4    | format version (u32) |
//! | 12     | 4    | dimension d (u32)    |
//! | 16     | 8    | cells per axis (u64) |
//! | 24     | 8    | t (f64)              |
//! | 32     | 8    | extent L (f64)       |
//! | 40     | 8    | master seed (u64)    |
//! | 48     | 8    | replica (u64)        |
//! | 56     | 8    | reserved, zero       |
//!
//! followed by `n^d` f64 values in row-major order.

use super::{FieldRun, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::io::{Read, Write};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"GMCSNAP1";
pub const SNAPSHOT_HEADER_LEN: usize = 64;
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub t: f64,
    pub master_seed: u64,
    pub replica: u64,
    pub values: Vec<f64>,
}

pub fn write_snapshot<T: Scalar, W: Write>(run: &FieldRun<T>, mut w: W) -> Result<()> {
    let g = run.grid();
    let mut header = Vec::with_capacity(SNAPSHOT_HEADER_LEN);
    header.extend_from_slice(SNAPSHOT_MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&(g.dimension() as u32).to_le_bytes());
    header.extend_from_slice(&(g.cells_per_axis() as u64).to_le_bytes());
    header.extend_from_slice(&run.t().to_le_bytes());
    header.extend_from_slice(&g.extent().to_le_bytes());
    header.extend_from_slice(&run.master_seed().to_le_bytes());
    header.extend_from_slice(&run.replica().to_le_bytes());
    header.extend_from_slice(&[0u8; 8]);
    debug_assert_eq!(header.len(), SNAPSHOT_HEADER_LEN);
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(run.values().len() * 8);
    for v in run.values() {
        body.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut header = [0u8; SNAPSHOT_HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[0..8] != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let grid = GridSpec::new(u32_at(12) as usize, u64_at(16) as usize, f64_at(32))
        .map_err(|e| Error::Format(e.to_string()))?;
    let mut body = vec![0u8; grid.cell_count() * 8];
    r.read_exact(&mut body)?;
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshot {
        grid,
        t: f64_at(24),
        master_seed: u64_at(40),
        replica: u64_at(48),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Backend, FieldSampler, ScaleLadder, SupMode};
    use crate::kernels::{SeedKernel, StarCovariance};

    #[test]
    fn round_trip() {
        let s = FieldSampler::<f64>::new(
            StarCovariance::new(SeedKernel::spline(2, 1.0).unwrap()),
            GridSpec::new(2, 8, 1.0).unwrap(),
            ScaleLadder::uniform(2.0, 1.0).unwrap(),
            Backend::Circulant,
            SupMode::Bridge,
        )
        .unwrap();
        let run = s.run(42, 3);
        let mut bytes = Vec::new();
        write_snapshot(&run, &mut bytes).unwrap();
        assert_eq!(bytes.len(), SNAPSHOT_HEADER_LEN + 64 * 8);
        let snap = read_snapshot(&bytes[..]).unwrap();
        assert_eq!(snap.grid, *run.grid());
        assert_eq!(snap.t, 2.0);
        assert_eq!(snap.master_seed, 42);
        assert_eq!(snap.replica, 3);
        assert_eq!(snap.values, run.values());
        bytes[0] = b'X';
        assert!(read_snapshot(&bytes[..]).is_err());
    }
}
