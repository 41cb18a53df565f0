//! Binary wave-function snapshots.
//!
//! Layout, all little-endian: the 6-byte magic `WVSIM1`, `u8` particle
//! count, `u32` points per axis, `f64` half-width, `f64` time, then the
//! `M^N` amplitudes as interleaved `(re, im)` `f64` pairs in row-major order.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::state::WaveFunction;

pub const MAGIC: &[u8; 6] = b"WVSIM1";
pub const HEADER_LEN: usize = 6 + 1 + 4 + 8 + 8;

pub fn encode(psi: &WaveFunction) -> Vec<u8> {
    let grid = psi.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(MAGIC);
    out.push(grid.n_particles() as u8);
    out.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&psi.time().to_le_bytes());
    for z in psi.amplitudes() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<WaveFunction> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::SizeMismatch { expected: HEADER_LEN as u64, found: bytes.len() as u64 });
    }
    if &bytes[..6] != MAGIC {
        return Err(Error::CorruptHeader(format!("bad magic {:?}", &bytes[..6])));
    }
    let n = bytes[6] as usize;
    let m = u32::from_le_bytes(bytes[7..11].try_into().unwrap()) as usize;
    let half_width = f64_at(bytes, 11);
    let time = f64_at(bytes, 19);
    if !time.is_finite() {
        return Err(Error::CorruptHeader(format!("non-finite time {time}")));
    }
    let grid = GridSpec::new(n, m, half_width).map_err(|e| Error::CorruptHeader(e.to_string()))?;
    let expected = HEADER_LEN as u64 + 16 * grid.len() as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch { expected, found: bytes.len() as u64 });
    }
    let amplitudes = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    WaveFunction::new(Arc::new(grid), amplitudes, time)
}

pub fn write_snapshot(psi: &WaveFunction, path: &Path) -> Result<()> {
    std::fs::write(path, encode(psi)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<WaveFunction> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
