//! The four reward heuristics and their linear combination.

use serde::{Deserialize, Serialize};

use super::view::PlanSegment;
use super::RewardWeights;
use crate::dynamics::{ActionInstance, GripperModel};
use crate::geom::{RigidTransform, Vec3};
use crate::occlusion::ShadowSet;
use crate::scene::{Camera, VoxelLabels};
use crate::voxel::{walk_segment, CellState, GridGeometry, OccupancyField, VoxelGrid, Walk};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Predicted dis-occluded voxel count.
    pub info: f64,
    /// Predicted centroid spread in meters.
    pub dispersion: f64,
    /// Signed centroid motion away from the rest of the scene, meters.
    pub direction: f64,
    /// Predicted swept-hand contact count.
    pub collision: f64,
    pub total: f64,
}

pub fn reward(weights: &RewardWeights, info: f64, dispersion: f64, direction: f64, collision: f64) -> RewardBreakdown {
    RewardBreakdown {
        info,
        dispersion,
        direction,
        collision,
        total: weights.info * info
            + weights.dispersion * dispersion
            + weights.direction * direction
            + weights.collision * collision,
    }
}

/// Shadow voxels attributed to one segment (their camera-ray blocker
/// belongs to it), with the visibility they would have if the segment's
/// volume were deleted: `open` is true when no other occupied voxel
/// blocks the sight line.
#[derive(Debug, Clone)]
pub struct ShadowAttribution {
    pub code: u16,
    /// (shadow linear index, shadow center, open once the segment moves)
    pub entries: Vec<(usize, Vec3, bool)>,
}

/// Classify every shadow voxel attributed to `code`: does removing that
/// segment's volume clear its sight line, or does something else still
/// block it?
pub fn attribute_shadows(
    field: &OccupancyField,
    labels: &VoxelLabels,
    shadows: &ShadowSet,
    camera: &Camera,
    code: u16,
) -> ShadowAttribution {
    let geom = field.geometry();
    let mut entries = Vec::new();
    for &(shadow, blocker) in &shadows.entries {
        if labels.code_linear(blocker) != code {
            continue;
        }
        let idx = geom.unlinear(shadow);
        let center = geom.voxel_center(idx);
        let open = !ray_blocked_excluding(field, labels, code, camera.position, center, idx);
        entries.push((shadow, center, open));
    }
    ShadowAttribution { code, entries }
}

/// True when an occupied voxel NOT labeled `exclude_code` lies strictly
/// between `from` and the voxel `to_idx`.
fn ray_blocked_excluding(
    field: &OccupancyField,
    labels: &VoxelLabels,
    exclude_code: u16,
    from: Vec3,
    to: Vec3,
    to_idx: [usize; 3],
) -> bool {
    let geom = field.geometry();
    let from_voxel = geom.world_to_voxel(from);
    let mut blocked = false;
    walk_segment(geom, from, to, |idx, _, _| {
        if idx == to_idx {
            return Walk::Stop;
        }
        if Some(idx) == from_voxel {
            return Walk::Continue;
        }
        if field.state(idx) == CellState::Occupied && labels.code_linear(geom.linear(idx)) != exclude_code
        {
            blocked = true;
            return Walk::Stop;
        }
        Walk::Continue
    });
    blocked
}

/// The segment's believed volume under a candidate transform, rasterized
/// back onto the field grid, with a world-space bounding box for fast
/// ray rejection.
pub struct MovedVolume {
    membership: VoxelGrid,
    bbox_min: Vec3,
    bbox_max: Vec3,
    empty: bool,
}

impl MovedVolume {
    pub fn new(geom: &GridGeometry, believed: &VoxelGrid, transform: RigidTransform) -> Self {
        let mut membership = VoxelGrid::new(*geom);
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut any = false;
        for idx in believed.iter_set() {
            let p = transform.apply(believed.geometry().voxel_center(idx));
            any = true;
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
            if let Some(t) = geom.world_to_voxel(p) {
                membership.set(t, true);
            }
        }
        let pad = geom.resolution;
        MovedVolume {
            membership,
            bbox_min: lo - Vec3::new(pad, pad, pad),
            bbox_max: hi + Vec3::new(pad, pad, pad),
            empty: !any,
        }
    }

    /// Does the segment from -> to (exclusive of the `to_idx` voxel) pass
    /// through the moved volume?
    fn blocks_ray(&self, geom: &GridGeometry, from: Vec3, to: Vec3, to_idx: [usize; 3]) -> bool {
        if self.empty || !segment_intersects_aabb(from, to, self.bbox_min, self.bbox_max) {
            return false;
        }
        let from_voxel = geom.world_to_voxel(from);
        let mut blocked = false;
        walk_segment(geom, from, to, |idx, _, _| {
            if idx == to_idx {
                return Walk::Stop;
            }
            if Some(idx) == from_voxel {
                return Walk::Continue;
            }
            if self.membership.get(idx) {
                blocked = true;
                return Walk::Stop;
            }
            Walk::Continue
        });
        blocked
    }

    pub fn contains(&self, idx: [usize; 3]) -> bool {
        self.membership.get(idx)
    }
}

fn segment_intersects_aabb(a: Vec3, b: Vec3, lo: Vec3, hi: Vec3) -> bool {
    let d = b - a;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (ac, dc, l, h) in [
        (a.x, d.x, lo.x, hi.x),
        (a.y, d.y, lo.y, hi.y),
        (a.z, d.z, lo.z, hi.z),
    ] {
        if dc == 0.0 {
            if ac < l || ac > h {
                return false;
            }
        } else {
            let ta = (l - ac) / dc;
            let tb = (h - ac) / dc;
            let (tmin, tmax) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(tmin);
            t1 = t1.min(tmax);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Information gain: how many currently-shadowed voxels the candidate
/// motion reveals. Only shadows attributed to the moved segment can
/// change; each is tested at its current location and, riding along with
/// the object, at its transformed location — visible either way counts.
pub fn info_gain(
    field: &OccupancyField,
    labels: &VoxelLabels,
    camera: &Camera,
    attribution: &ShadowAttribution,
    moved: &MovedVolume,
    transform: RigidTransform,
) -> usize {
    let geom = field.geometry();
    let mut count = 0usize;
    for &(shadow, center, open) in &attribution.entries {
        let idx = geom.unlinear(shadow);
        // Old location: everything else that blocked it is unchanged; the
        // moved volume may still (or newly) cover the sight line.
        if open && !moved.blocks_ray(geom, camera.position, center, idx) && !moved.contains(idx) {
            count += 1;
            continue;
        }
        // Carried along with the object.
        let q = transform.apply(center);
        let Some(q_idx) = geom.world_to_voxel(q) else { continue };
        if q_idx[2] == 0 || !camera.in_frustum(q) {
            continue;
        }
        let blocked_static = ray_blocked_excluding(
            field,
            labels,
            attribution.code,
            camera.position,
            q,
            q_idx,
        );
        if !blocked_static && !moved.blocks_ray(geom, camera.position, q, q_idx) {
            count += 1;
        }
    }
    count
}

/// Spread of the predicted segment centroids: root mean squared distance
/// from their mean.
pub fn dispersion(segments: &[PlanSegment], moved_index: usize, transform: RigidTransform) -> f64 {
    if segments.is_empty() {
        return 0.0;
    }
    let centroids: Vec<Vec3> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if i == moved_index {
                transform.apply(s.centroid)
            } else {
                s.centroid
            }
        })
        .collect();
    let mut mean = Vec3::ZERO;
    for c in &centroids {
        mean = mean + *c;
    }
    mean = mean.scale(1.0 / centroids.len() as f64);
    let msd: f64 = centroids.iter().map(|c| (*c - mean).norm_sq()).sum::<f64>()
        / centroids.len() as f64;
    msd.sqrt()
}

/// Signed table-plane motion of the moved segment's centroid away from
/// the mean centroid of the other segments (positive = away). Zero when
/// nothing else is detected.
pub fn direction(segments: &[PlanSegment], moved_index: usize, transform: RigidTransform) -> f64 {
    let others: Vec<Vec3> = segments
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != moved_index)
        .map(|(_, s)| s.centroid)
        .collect();
    if others.is_empty() {
        return 0.0;
    }
    let mut mean = Vec3::ZERO;
    for c in &others {
        mean = mean + *c;
    }
    mean = mean.scale(1.0 / others.len() as f64);
    let before = segments[moved_index].centroid;
    let after = transform.apply(before);
    after.planar_distance(mean) - before.planar_distance(mean)
}

/// Predicted swept-hand contacts against the other segments' believed
/// footprints (the planner cannot see ground truth).
pub fn predicted_sweep_contacts(
    segments: &[PlanSegment],
    moved_index: usize,
    action: &ActionInstance,
    gripper: &GripperModel,
    resolution: f64,
) -> usize {
    let path = action.hand_path();
    let samples = crate::dynamics::sample_hand_path(&path, resolution * 0.5, action.hand_sweeps_table());
    let mut contacts = 0usize;
    for (i, s) in segments.iter().enumerate() {
        if i == moved_index {
            continue;
        }
        let threshold = (gripper.radius + 0.5 * resolution) * (1.0 - 1e-9);
        let hit = samples.iter().any(|p| {
            s.footprint.iter().any(|q| {
                (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) < threshold * threshold
            })
        });
        if hit {
            contacts += 1;
        }
    }
    contacts
}
