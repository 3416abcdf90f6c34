//! Probabilistic ternary occupancy field over the workspace.

use super::{GridGeometry, VoxelGrid};
use crate::error::{Error, Result};

/// Believed state of one voxel. `Free` and `Occupied` cover both fresh
/// observations and claims written by shape completion or memory; claims
/// only ever overwrite `Unknown` cells, so a fresh observation always wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyField {
    geom: GridGeometry,
    tau: f64,
    state: Vec<CellState>,
    occupancy: Vec<f64>,
}

impl OccupancyField {
    /// A fully unobserved field; every voxel sits at the occupancy threshold.
    pub fn new(geom: GridGeometry, tau_occupancy: f64) -> Self {
        assert!((0.0..1.0).contains(&tau_occupancy) && tau_occupancy > 0.0);
        let n = geom.len();
        OccupancyField {
            geom,
            tau: tau_occupancy,
            state: vec![CellState::Unknown; n],
            occupancy: vec![tau_occupancy; n],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn tau_occupancy(&self) -> f64 {
        self.tau
    }

    pub fn state(&self, idx: [usize; 3]) -> CellState {
        self.state[self.geom.linear(idx)]
    }

    pub fn state_linear(&self, l: usize) -> CellState {
        self.state[l]
    }

    pub fn occupancy(&self, idx: [usize; 3]) -> f64 {
        self.occupancy[self.geom.linear(idx)]
    }

    pub fn occupancy_linear(&self, l: usize) -> f64 {
        self.occupancy[l]
    }

    pub fn mark_free(&mut self, l: usize) {
        // Occupied wins over free within one observation.
        if self.state[l] != CellState::Occupied {
            self.state[l] = CellState::Free;
            self.occupancy[l] = 0.0;
        }
    }

    pub fn mark_occupied(&mut self, l: usize) {
        self.state[l] = CellState::Occupied;
        self.occupancy[l] = 1.0;
    }

    /// Claim an unknown voxel as occupied (completion / positive memory).
    /// Returns true if the claim was applied.
    pub fn claim_occupied(&mut self, l: usize) -> bool {
        if self.state[l] == CellState::Unknown {
            self.state[l] = CellState::Occupied;
            self.occupancy[l] = 1.0;
            true
        } else {
            false
        }
    }

    /// Claim an unknown voxel as free (negative memory).
    pub fn claim_free(&mut self, l: usize) -> bool {
        if self.state[l] == CellState::Unknown {
            self.state[l] = CellState::Free;
            self.occupancy[l] = 0.0;
            true
        } else {
            false
        }
    }

    /// Overwrite the occupancy value of an unknown voxel (belief carry-over).
    pub fn set_unknown_occupancy(&mut self, l: usize, value: f64) {
        debug_assert!(self.state[l] == CellState::Unknown);
        self.occupancy[l] = value.clamp(0.0, 1.0);
    }

    pub fn check_same_geometry(&self, other: &OccupancyField) -> Result<()> {
        if self.geom.same_as(other.geometry()) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch("occupancy fields differ".into()))
        }
    }

    pub fn count_state(&self, s: CellState) -> usize {
        self.state.iter().filter(|&&c| c == s).count()
    }

    pub fn iter_linear(&self) -> impl Iterator<Item = (usize, CellState, f64)> + '_ {
        self.state
            .iter()
            .zip(&self.occupancy)
            .enumerate()
            .map(|(l, (s, o))| (l, *s, *o))
    }

    /// Binary grid of the occupied voxels.
    pub fn occupied_grid(&self) -> VoxelGrid {
        let mut g = VoxelGrid::new(self.geom);
        for (l, s) in self.state.iter().enumerate() {
            if *s == CellState::Occupied {
                g.set_linear(l, true);
            }
        }
        g
    }

    /// Binary grid of the observed-free voxels.
    pub fn free_grid(&self) -> VoxelGrid {
        let mut g = VoxelGrid::new(self.geom);
        for (l, s) in self.state.iter().enumerate() {
            if *s == CellState::Free {
                g.set_linear(l, true);
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    #[test]
    fn fresh_field_is_unknown_at_tau() {
        let f = OccupancyField::new(GridGeometry::cube(4, 0.01), 0.5);
        assert_eq!(f.count_state(CellState::Unknown), 64);
        assert_eq!(f.occupancy([2, 2, 2]), 0.5);
    }

    #[test]
    fn occupied_wins_over_free() {
        let mut f = OccupancyField::new(GridGeometry::cube(2, 0.01), 0.5);
        f.mark_occupied(0);
        f.mark_free(0);
        assert_eq!(f.state_linear(0), CellState::Occupied);
        assert_eq!(f.occupancy_linear(0), 1.0);
    }

    #[test]
    fn claims_do_not_override_observations() {
        let mut f = OccupancyField::new(GridGeometry::cube(2, 0.01), 0.5);
        f.mark_free(3);
        assert!(!f.claim_occupied(3));
        assert_eq!(f.state_linear(3), CellState::Free);
        assert!(f.claim_occupied(4));
        assert!(!f.claim_free(4));
    }

    #[test]
    fn threshold_invariants_hold() {
        let mut f = OccupancyField::new(GridGeometry::new([3, 3, 3], 0.01, Vec3::ZERO), 0.5);
        f.mark_free(1);
        f.mark_occupied(2);
        for (l, s, occ) in f.iter_linear() {
            match s {
                CellState::Free => assert!(occ < f.tau_occupancy(), "voxel {l}"),
                CellState::Occupied => assert!(occ >= f.tau_occupancy(), "voxel {l}"),
                CellState::Unknown => assert!((0.0..=1.0).contains(&occ)),
            }
        }
    }
}
