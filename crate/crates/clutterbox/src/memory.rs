//! Volumetric memory: carrying known object volume and known free space
//! across manipulation steps, with an affine decay of unobserved belief.
//!
//! Precedence when sources disagree about an unobserved voxel:
//! current observation > shape completion > positive memory > negative
//! memory > decayed prior. The orderings below are enforced structurally:
//! claims only ever touch `Unknown` cells, and the caller applies the
//! writers in that order.

use crate::error::Result;
use crate::geom::RigidTransform;
use crate::voxel::{CellState, OccupancyField, VoxelGrid};

#[derive(Debug, Clone, Copy)]
pub struct MemoryConfig {
    /// Decay rate toward the occupancy threshold, in (0, 1).
    pub alpha: f64,
    pub tau_occupancy: f64,
    pub positive_enabled: bool,
    pub negative_enabled: bool,
}

impl MemoryConfig {
    pub fn enabled(alpha: f64, tau_occupancy: f64) -> Self {
        assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
        MemoryConfig { alpha, tau_occupancy, positive_enabled: true, negative_enabled: true }
    }

    pub fn disabled() -> Self {
        MemoryConfig {
            alpha: 0.9,
            tau_occupancy: 0.5,
            positive_enabled: false,
            negative_enabled: false,
        }
    }
}

impl Default for MemoryConfig {
    fn default() -> Self {
        MemoryConfig::enabled(0.9, 0.5)
    }
}

/// Positive memory: the manipulated object's believed volume at t-1,
/// moved by the commanded transform, claims currently-unobserved voxels
/// as occupied. Observed voxels are untouched — the fresh observation
/// wins. Returns the set of voxels claimed (for labeling).
pub fn apply_positive_memory(
    prev_object: &VoxelGrid,
    transform: RigidTransform,
    field: &mut OccupancyField,
) -> Vec<usize> {
    let geom = *field.geometry();
    let mut claimed = Vec::new();
    for idx in prev_object.iter_set() {
        let moved = transform.apply(prev_object.geometry().voxel_center(idx));
        // Voxels landing outside the workspace are dropped.
        if let Some(target) = geom.world_to_voxel(moved) {
            let l = geom.linear(target);
            if field.claim_occupied(l) {
                claimed.push(l);
            }
        }
    }
    claimed
}

/// Negative memory: voxels observed free at t-1 that are unobserved at t
/// are claimed free, unless something already claimed them occupied
/// (shape completion and positive memory run first and take precedence).
pub fn apply_negative_memory(
    prev_field: &OccupancyField,
    field: &mut OccupancyField,
) -> Result<usize> {
    field.check_same_geometry(prev_field)?;
    let mut claimed = 0usize;
    for l in 0..field.geometry().len() {
        if prev_field.state_linear(l) == CellState::Free && field.claim_free(l) {
            claimed += 1;
        }
    }
    Ok(claimed)
}

/// Apply the affine decay `V <- alpha * V + (1 - alpha) * tau` to every
/// unobserved voxel, `steps` times. Observed voxels are untouched.
/// Evaluated as `tau + alpha * (V - tau)`, the same map with tau as an
/// exact fixed point in floating point.
pub fn decay_unobserved(field: &mut OccupancyField, cfg: &MemoryConfig, steps: usize) {
    assert!(steps >= 1, "decay requires at least one step");
    let alpha = cfg.alpha;
    let tau = cfg.tau_occupancy;
    for l in 0..field.geometry().len() {
        if field.state_linear(l) == CellState::Unknown {
            let mut v = field.occupancy_linear(l);
            for _ in 0..steps {
                v = tau + alpha * (v - tau);
            }
            field.set_unknown_occupancy(l, v);
        }
    }
}

/// Carry the previous step's belief into the currently unobserved voxels
/// of a freshly carved field (the decayed prior the memory rules refine).
pub fn carry_unobserved_prior(prev_field: &OccupancyField, field: &mut OccupancyField) -> Result<()> {
    field.check_same_geometry(prev_field)?;
    for l in 0..field.geometry().len() {
        if field.state_linear(l) == CellState::Unknown {
            field.set_unknown_occupancy(l, prev_field.occupancy_linear(l));
        }
    }
    Ok(())
}
