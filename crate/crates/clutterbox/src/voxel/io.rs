//! Binary voxel grid file format (`.vxg`).
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "VXGRID01"
//! 8       8     nx (u64)
//! 16      8     ny (u64)
//! 24      8     nz (u64)
//! 32      8     resolution in meters (f64)
//! 40      24    origin x, y, z in meters (3 x f64)
//! 64      ⌈nx·ny·nz/8⌉  bit-packed payload
//! ```
//!
//! Payload bit order is x-fastest: voxel (x, y, z) maps to linear index
//! l = x + nx·(y + ny·z), stored in bit (l mod 8) of byte ⌊l/8⌋, LSB first.
//! Trailing pad bits of the final byte are zero.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GridGeometry, VoxelGrid};
use crate::error::{Error, Result};
use crate::geom::Vec3;

pub const GRID_MAGIC: &[u8; 8] = b"VXGRID01";

pub fn save_grid(grid: &VoxelGrid, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let geom = grid.geometry();
    w.write_all(GRID_MAGIC)?;
    for d in geom.dims {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    w.write_all(&geom.resolution.to_le_bytes())?;
    for c in [geom.origin.x, geom.origin.y, geom.origin.z] {
        w.write_all(&c.to_le_bytes())?;
    }
    let n = geom.len();
    let mut payload = vec![0u8; n.div_ceil(8)];
    for l in 0..n {
        if grid.get_linear(l) {
            payload[l / 8] |= 1 << (l % 8);
        }
    }
    w.write_all(&payload)?;
    w.flush()?;
    Ok(())
}

pub fn load_grid(path: &Path) -> Result<VoxelGrid> {
    let bad = |message: &str| Error::BadGridFile {
        file: path.display().to_string(),
        message: message.to_string(),
    };
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != GRID_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut u64buf = [0u8; 8];
    let mut dims = [0usize; 3];
    for d in &mut dims {
        r.read_exact(&mut u64buf)?;
        let v = u64::from_le_bytes(u64buf);
        if v == 0 || v > 1 << 20 {
            return Err(bad("unreasonable dimension"));
        }
        *d = v as usize;
    }
    r.read_exact(&mut u64buf)?;
    let resolution = f64::from_le_bytes(u64buf);
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(bad("bad resolution"));
    }
    let mut origin = [0.0f64; 3];
    for c in &mut origin {
        r.read_exact(&mut u64buf)?;
        *c = f64::from_le_bytes(u64buf);
        if !c.is_finite() {
            return Err(bad("bad origin"));
        }
    }
    let geom = GridGeometry::new(dims, resolution, Vec3::new(origin[0], origin[1], origin[2]));
    let n = geom.len();
    let mut payload = vec![0u8; n.div_ceil(8)];
    r.read_exact(&mut payload)?;
    let mut grid = VoxelGrid::new(geom);
    for (l, _) in (0..n).enumerate() {
        if (payload[l / 8] >> (l % 8)) & 1 == 1 {
            grid.set_linear(l, true);
        }
    }
    Ok(grid)
}
