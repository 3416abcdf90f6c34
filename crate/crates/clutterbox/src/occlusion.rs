//! Shadow computation and occlusion-driven object selection.
//!
//! A workspace voxel is a shadow when it is neither observed free nor
//! believed occupied and some occupied voxel blocks its sight line to the
//! camera. Shadows are where a hidden target can be, so the planner
//! samples them to decide which object to move.

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::rng::Pcg32;
use crate::scene::{Camera, VoxelLabels, LABEL_TABLE};
use crate::voxel::{walk_segment, CellState, OccupancyField, VoxelGrid, Walk};

/// Occluded voxels of a field, each paired with the occupied voxel that
/// blocks its camera ray (the first blocker from the camera side).
#[derive(Debug, Clone)]
pub struct ShadowSet {
    /// (shadow voxel, blocking voxel), linear indices into the field.
    pub entries: Vec<(usize, usize)>,
    membership: VoxelGrid,
}

impl ShadowSet {
    pub fn new(entries: Vec<(usize, usize)>, membership: VoxelGrid) -> Self {
        ShadowSet { entries, membership }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_linear(&self, l: usize) -> bool {
        self.membership.get_linear(l)
    }

    /// Export as a binary grid (for visualization tooling).
    pub fn to_grid(&self) -> VoxelGrid {
        self.membership.clone()
    }

    /// Shadow voxels whose blocker carries the given label code.
    pub fn attributed_to(&self, labels: &VoxelLabels, code: u16) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|(_, blocker)| labels.code_linear(*blocker) == code)
            .map(|(shadow, _)| *shadow)
            .collect()
    }

    /// Count of shadow voxels per blocker label code.
    pub fn count_by_label(&self, labels: &VoxelLabels) -> std::collections::BTreeMap<u16, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for (_, blocker) in &self.entries {
            *counts.entry(labels.code_linear(*blocker)).or_insert(0) += 1;
        }
        counts
    }
}

/// Segment chords shorter than this fraction of the ray are corner
/// touches at floating-point noise level, not physical contact.
const GRAZE_EPSILON: f64 = 1e-13;

/// First believed-occupied voxel strictly between `origin` and `target`
/// (the voxels containing the endpoints are excluded), or None. Voxels
/// the segment merely grazes at a corner do not block.
pub fn raycast(field: &OccupancyField, origin: Vec3, target: Vec3) -> Option<[usize; 3]> {
    let geom = field.geometry();
    let origin_voxel = geom.world_to_voxel(origin);
    let target_voxel = geom.world_to_voxel(target);
    let mut hit = None;
    walk_segment(geom, origin, target, |idx, t_enter, t_exit| {
        if Some(idx) == target_voxel {
            return Walk::Stop;
        }
        if Some(idx) == origin_voxel {
            return Walk::Continue;
        }
        if field.state(idx) == CellState::Occupied && t_exit - t_enter > GRAZE_EPSILON {
            hit = Some(idx);
            return Walk::Stop;
        }
        Walk::Continue
    });
    hit
}

/// True when the voxel is searchable workspace: on or above the table
/// surface layer (the table-material layer itself is z index 0).
fn in_workspace(idx: [usize; 3]) -> bool {
    idx[2] >= 1
}

/// Compute the shadow set of a field: unknown workspace voxels inside the
/// camera frustum whose camera ray is blocked. Observed voxels — free or
/// occupied — are never shadows; raycasting starts from unknown cells.
pub fn compute_occlusions(field: &OccupancyField, camera: &Camera) -> ShadowSet {
    let geom = field.geometry();
    let mut entries = Vec::new();
    let mut membership = VoxelGrid::new(*geom);
    for idx in geom.iter_indices() {
        if !in_workspace(idx) {
            continue;
        }
        if field.state(idx) != CellState::Unknown {
            continue;
        }
        let center = geom.voxel_center(idx);
        if !camera.in_frustum(center) {
            continue;
        }
        if let Some(blocker) = raycast(field, camera.position, center) {
            let l = geom.linear(idx);
            entries.push((l, geom.linear(blocker)));
            membership.set_linear(l, true);
        }
    }
    ShadowSet { entries, membership }
}

/// Retry budget for shadow samples whose blocker is not a planning
/// segment (the table, or remembered volume with no segment this step).
pub const TABLE_RESAMPLE_LIMIT: usize = 32;

/// Sample a shadow voxel uniformly and return the label code of the voxel
/// blocking its camera ray. Samples whose blocker is the table or any
/// other non-segment voxel are redrawn up to [`TABLE_RESAMPLE_LIMIT`]
/// times.
pub fn select_object(shadows: &ShadowSet, labels: &VoxelLabels, rng: &mut Pcg32) -> Result<u16> {
    assert!(!shadows.is_empty(), "select_object requires a nonempty shadow set");
    for _ in 0..TABLE_RESAMPLE_LIMIT {
        let (_, blocker) = shadows.entries[rng.below(shadows.entries.len())];
        let code = labels.code_linear(blocker);
        if code > LABEL_TABLE {
            return Ok(code);
        }
    }
    Err(Error::NoSelectableObject { retries: TABLE_RESAMPLE_LIMIT })
}
