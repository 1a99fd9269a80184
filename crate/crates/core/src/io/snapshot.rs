//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `RDGSNAP1` |
//! | 3 × u64 | grid dimensions |
//! | 3 × f64 | domain lengths |
//! | 3 × f64 | domain origin |
//! | f64 | time |
//! | u32, u32 | component count (3), scalar width (8) |
//! | 3 × N × f64 | `n1` for every point, then `n2`, then `n3` |

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::DirectorField;
use crate::grid::Grid;

pub const MAGIC: &[u8; 8] = b"RDGSNAP1";
pub const HEADER_LEN: usize = 8 + 24 + 24 + 24 + 8 + 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: DirectorField,
}

pub fn encode(t: f64, field: &DirectorField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.as_slice().len());
    out.extend_from_slice(MAGIC);
    for d in grid.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in grid.lengths().into_iter().chain(grid.origin()).chain([t]) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&3u32.to_le_bytes());
    out.extend_from_slice(&8u32.to_le_bytes());
    for v in field.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.pos + K;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format(format!("truncated at byte {} of {}", self.bytes.len(), end)))?;
        self.pos = end;
        Ok(chunk.try_into().unwrap())
    }
    fn u64(&mut self) -> Result<u64> {
        self.take::<8>().map(u64::from_le_bytes)
    }
    fn u32(&mut self) -> Result<u32> {
        self.take::<4>().map(u32::from_le_bytes)
    }
    fn f64(&mut self) -> Result<f64> {
        self.take::<8>().map(f64::from_le_bytes)
    }
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    let mut c = Cursor { bytes, pos: 0 };
    if &c.take::<8>()? != MAGIC {
        return Err(Error::Format("bad magic, not an RDGSNAP1 file".into()));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = usize::try_from(c.u64()?).map_err(|_| Error::Format("dimension overflows usize".into()))?;
    }
    let mut lengths = [0.0; 3];
    let mut origin = [0.0; 3];
    for v in lengths.iter_mut().chain(origin.iter_mut()) {
        *v = c.f64()?;
    }
    let t = c.f64()?;
    let (ncomp, width) = (c.u32()?, c.u32()?);
    if ncomp != 3 || width != 8 {
        return Err(Error::Format(format!("unsupported layout: {ncomp} components of {width} bytes")));
    }
    let grid = Grid::new(dims, lengths, origin).map_err(|e| Error::Format(format!("bad grid header: {e}")))?;
    let count = 3 * grid.len();
    let expected = HEADER_LEN + 8 * count;
    if bytes.len() != expected {
        return Err(Error::Format(if bytes.len() < expected {
            format!("truncated payload: {} of {expected} bytes", bytes.len())
        } else {
            format!("{} trailing bytes", bytes.len() - expected)
        }));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let field = DirectorField::from_flat(grid, data).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Snapshot { t, field })
}

pub fn write_snapshot(path: &Path, t: f64, field: &DirectorField) -> Result<()> {
    std::fs::write(path, encode(t, field)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
