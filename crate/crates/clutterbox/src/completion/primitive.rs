//! Analytic solid primitives voxelized by center-inclusion.

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::voxel::{GridGeometry, VoxelGrid};

/// Parameterized convex solid in its canonical frame: x/y centered on the
/// vertical axis, bottom face at z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimitiveSpec {
    Box { size: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
    Sphere { radius: f64 },
    /// Regular n-gon cross-section with the given circumradius, extruded
    /// to `height`.
    Prism { sides: u32, radius: f64, height: f64 },
}

impl PrimitiveSpec {
    fn extents(&self) -> [(&'static str, f64); 3] {
        match *self {
            PrimitiveSpec::Box { size } => [("x", size[0]), ("y", size[1]), ("z", size[2])],
            PrimitiveSpec::Cylinder { radius, height } => {
                [("diameter", 2.0 * radius), ("diameter", 2.0 * radius), ("height", height)]
            }
            PrimitiveSpec::Sphere { radius } => {
                [("diameter", 2.0 * radius), ("diameter", 2.0 * radius), ("diameter", 2.0 * radius)]
            }
            PrimitiveSpec::Prism { radius, height, .. } => {
                [("diameter", 2.0 * radius), ("diameter", 2.0 * radius), ("height", height)]
            }
        }
    }

    fn contains(&self, p: Vec3) -> bool {
        match *self {
            PrimitiveSpec::Box { size } => {
                p.x.abs() <= size[0] * 0.5 && p.y.abs() <= size[1] * 0.5 && p.z >= 0.0 && p.z <= size[2]
            }
            PrimitiveSpec::Cylinder { radius, height } => {
                p.z >= 0.0 && p.z <= height && p.x * p.x + p.y * p.y <= radius * radius
            }
            PrimitiveSpec::Sphere { radius } => {
                let c = Vec3::new(0.0, 0.0, radius);
                (p - c).norm_sq() <= radius * radius
            }
            PrimitiveSpec::Prism { sides, radius, height } => {
                if p.z < 0.0 || p.z > height {
                    return false;
                }
                // Inside every edge half-plane of the regular polygon.
                let n = sides as usize;
                (0..n).all(|i| {
                    let a0 = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    let a1 = 2.0 * std::f64::consts::PI * (i + 1) as f64 / n as f64;
                    let (v0x, v0y) = (radius * a0.cos(), radius * a0.sin());
                    let (v1x, v1y) = (radius * a1.cos(), radius * a1.sin());
                    (v1x - v0x) * (p.y - v0y) - (v1y - v0y) * (p.x - v0x) >= 0.0
                })
            }
        }
    }
}

/// Voxelize a primitive: a voxel is set iff its center lies inside the
/// analytic solid. Errors if any extent is smaller than one voxel.
pub fn voxelize_primitive(spec: &PrimitiveSpec, resolution: f64) -> Result<VoxelGrid> {
    assert!(resolution > 0.0);
    if let PrimitiveSpec::Prism { sides, .. } = spec {
        if *sides < 3 {
            return Err(Error::PrimitiveTooSmall { dim: "sides", value: *sides as f64, resolution });
        }
    }
    for (dim, value) in spec.extents() {
        if value < resolution {
            return Err(Error::PrimitiveTooSmall { dim, value, resolution });
        }
    }
    let [(_, ex), (_, ey), (_, ez)] = spec.extents();
    let dims = [
        (ex / resolution).ceil() as usize,
        (ey / resolution).ceil() as usize,
        (ez / resolution).ceil() as usize,
    ];
    let origin = Vec3::new(
        -(dims[0] as f64) * resolution * 0.5,
        -(dims[1] as f64) * resolution * 0.5,
        0.0,
    );
    let geom = GridGeometry::new(dims, resolution, origin);
    let mut grid = VoxelGrid::new(geom);
    for idx in geom.iter_indices() {
        if spec.contains(geom.voxel_center(idx)) {
            grid.set(idx, true);
        }
    }
    Ok(grid)
}
