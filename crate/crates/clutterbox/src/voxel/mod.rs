//! Voxel grid representations, coordinate transforms, set algebra, and the
//! squared-nearest-neighbor point-set distance used throughout the crate.

mod chamfer;
mod field;
mod grid;
mod io;
mod traverse;

pub use chamfer::{chamfer_distance, chamfer_distance_brute, grid_distance, PointSet};
pub use field::{CellState, OccupancyField};
pub use grid::VoxelGrid;
pub use io::{load_grid, save_grid, GRID_MAGIC};
pub use traverse::{walk_segment, Walk};

use crate::geom::Vec3;
use serde::{Deserialize, Serialize};

/// Shared geometry of a dense voxel grid: integer dims, edge length in
/// meters, and the world position of the (0,0,0) voxel corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub dims: [usize; 3],
    pub resolution: f64,
    pub origin: Vec3,
}

impl GridGeometry {
    pub fn new(dims: [usize; 3], resolution: f64, origin: Vec3) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "grid dims must be positive");
        assert!(resolution > 0.0, "resolution must be positive");
        GridGeometry { dims, resolution, origin }
    }

    /// Cube grid of side `n` with its origin at the world origin.
    pub fn cube(n: usize, resolution: f64) -> Self {
        Self::new([n, n, n], resolution, Vec3::ZERO)
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Linear index with x fastest: l = x + nx * (y + ny * z).
    pub fn linear(&self, idx: [usize; 3]) -> usize {
        debug_assert!(self.contains(idx));
        idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2])
    }

    pub fn unlinear(&self, l: usize) -> [usize; 3] {
        let x = l % self.dims[0];
        let rest = l / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn contains(&self, idx: [usize; 3]) -> bool {
        idx[0] < self.dims[0] && idx[1] < self.dims[1] && idx[2] < self.dims[2]
    }

    /// World coordinates of the center of voxel `idx`.
    pub fn voxel_center(&self, idx: [usize; 3]) -> Vec3 {
        Vec3::new(
            self.origin.x + (idx[0] as f64 + 0.5) * self.resolution,
            self.origin.y + (idx[1] as f64 + 0.5) * self.resolution,
            self.origin.z + (idx[2] as f64 + 0.5) * self.resolution,
        )
    }

    /// Voxel containing a world point, or None if outside the grid.
    pub fn world_to_voxel(&self, p: Vec3) -> Option<[usize; 3]> {
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        let fz = (p.z - self.origin.z) / self.resolution;
        if fx < 0.0 || fy < 0.0 || fz < 0.0 {
            return None;
        }
        let idx = [fx.floor() as usize, fy.floor() as usize, fz.floor() as usize];
        if self.contains(idx) {
            Some(idx)
        } else {
            None
        }
    }

    /// Far corner of the grid volume in world coordinates.
    pub fn max_corner(&self) -> Vec3 {
        Vec3::new(
            self.origin.x + self.dims[0] as f64 * self.resolution,
            self.origin.y + self.dims[1] as f64 * self.resolution,
            self.origin.z + self.dims[2] as f64 * self.resolution,
        )
    }

    pub fn same_as(&self, other: &GridGeometry) -> bool {
        self.dims == other.dims
            && self.resolution == other.resolution
            && self.origin == other.origin
    }

    pub fn iter_indices(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let dims = self.dims;
        (0..dims[2]).flat_map(move |z| {
            (0..dims[1]).flat_map(move |y| (0..dims[0]).map(move |x| [x, y, z]))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_roundtrip() {
        let g = GridGeometry::new([3, 4, 5], 0.01, Vec3::ZERO);
        for idx in g.iter_indices() {
            assert_eq!(g.unlinear(g.linear(idx)), idx);
        }
    }

    #[test]
    fn world_voxel_roundtrip() {
        let g = GridGeometry::new([16, 16, 16], 0.013, Vec3::new(-0.4, 0.2, -0.1));
        for idx in g.iter_indices() {
            assert_eq!(g.world_to_voxel(g.voxel_center(idx)), Some(idx));
        }
    }

    #[test]
    fn out_of_bounds_points_are_none() {
        let g = GridGeometry::new([4, 4, 4], 0.1, Vec3::ZERO);
        assert_eq!(g.world_to_voxel(Vec3::new(-0.01, 0.1, 0.1)), None);
        assert_eq!(g.world_to_voxel(Vec3::new(0.41, 0.1, 0.1)), None);
    }
}
