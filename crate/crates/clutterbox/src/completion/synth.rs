//! Occluded-dataset synthesis: render a rotated shape from a fixed
//! viewpoint with part of the view blocked by an obstacle mask, harvest
//! the visible surface and carved free space, and normalize the triple
//! into the reconstruction grid.

use crate::geom::{Mat3, Vec3};
use crate::rng::Pcg32;
use crate::voxel::{walk_segment, GridGeometry, VoxelGrid, Walk};

/// One synthesized example: observed surface, observed free space, and the
/// ground-truth volume, plus the effective camera position in the triple's
/// frame (valid after recentering and the camera-ward shift).
#[derive(Debug, Clone)]
pub struct DatasetTriple {
    pub partial: VoxelGrid,
    pub free: VoxelGrid,
    pub truth: VoxelGrid,
    pub camera: Vec3,
    pub meta: TripleMeta,
}

#[derive(Debug, Clone)]
pub struct TripleMeta {
    pub example_id: usize,
    pub shape: String,
    pub rotation: usize,
    pub rpy: [f64; 3],
    pub occluder_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Reconstruction grid is `grid_n`³ voxels.
    pub grid_n: usize,
    pub resolution: f64,
    /// Rotations sampled per input shape.
    pub rotations: usize,
    /// Fraction of the object's projected view blocked by the obstacle
    /// mask; 0.25 blocks one quadrant.
    pub occluder_fraction: f64,
    /// Voxels the normalized triple is shifted toward the camera.
    pub shift_offset: usize,
    /// Camera distance as a multiple of the grid extent.
    pub camera_distance_factor: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            grid_n: 64,
            resolution: 0.004,
            rotations: 8,
            occluder_fraction: 0.25,
            shift_offset: 4,
            camera_distance_factor: 2.0,
            seed: 0,
        }
    }
}

/// Generate triples for each shape x rotation. Fully occluded examples
/// (empty partial) are discarded. Each example draws from its own RNG
/// stream (master seed + example index) so the dataset is identical
/// however the work is scheduled.
pub fn synthesize_dataset(shapes: &[(String, VoxelGrid)], cfg: &SynthConfig) -> Vec<DatasetTriple> {
    assert!(!shapes.is_empty(), "need at least one shape");
    let mut out = Vec::new();
    let mut example_id = 0usize;
    for (shape_name, base) in shapes {
        for rotation in 0..cfg.rotations {
            let seed = cfg.seed.wrapping_add(example_id as u64);
            let mut rng = Pcg32::new(seed);
            if let Some(triple) =
                synthesize_one(shape_name, base, rotation, cfg, seed, example_id, &mut rng)
            {
                out.push(triple);
            }
            example_id += 1;
        }
    }
    out
}

fn synthesize_one(
    shape_name: &str,
    base: &VoxelGrid,
    rotation: usize,
    cfg: &SynthConfig,
    seed: u64,
    example_id: usize,
    rng: &mut Pcg32,
) -> Option<DatasetTriple> {
    let n = cfg.grid_n;
    let res = cfg.resolution;
    let half = n as f64 * res * 0.5;
    let geom = GridGeometry::new([n, n, n], res, Vec3::new(-half, -half, -half));

    // Rotated ground truth, centered in the reconstruction grid.
    let tau = 2.0 * std::f64::consts::PI;
    let rpy = [rng.range_f64(0.0, tau), rng.range_f64(0.0, tau), rng.range_f64(0.0, tau)];
    let rot = Mat3::from_rpy(rpy[0], rpy[1], rpy[2]);
    let rot_inv = rot.transpose();
    let base_geom = base.geometry();
    let base_center = (base_geom.origin + base_geom.max_corner()).scale(0.5);
    let mut truth = VoxelGrid::new(geom);
    for idx in geom.iter_indices() {
        let p = rot_inv.apply(geom.voxel_center(idx)) + base_center;
        if let Some(b) = base_geom.world_to_voxel(p) {
            if base.get(b) {
                truth.set(idx, true);
            }
        }
    }
    if truth.is_empty() {
        return None;
    }

    // Fixed viewpoint along -y; view-plane basis (right = +x, up = +z).
    let camera = Vec3::new(0.0, -(cfg.camera_distance_factor * n as f64 * res), 0.0);
    let view = |p: Vec3| -> (f64, f64) {
        let v = p - camera;
        let depth = v.y;
        (v.x / depth, v.z / depth)
    };

    // Obstacle mask: the upper-right rectangle of the object's projected
    // view box, sized to cover `occluder_fraction` of its area.
    let mut u0 = f64::INFINITY;
    let mut u1 = f64::NEG_INFINITY;
    let mut v0 = f64::INFINITY;
    let mut v1 = f64::NEG_INFINITY;
    for idx in truth.iter_set() {
        let (u, v) = view(geom.voxel_center(idx));
        u0 = u0.min(u);
        u1 = u1.max(u);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    let side = cfg.occluder_fraction.clamp(0.0, 1.0).sqrt();
    let mask_u = u1 - side * (u1 - u0);
    let mask_v = v1 - side * (v1 - v0);
    let masked = |p: Vec3| -> bool {
        if cfg.occluder_fraction <= 0.0 {
            return false;
        }
        if cfg.occluder_fraction >= 1.0 {
            return true;
        }
        let (u, v) = view(p);
        u >= mask_u && v >= mask_v
    };

    // Per-voxel visibility: blocked iff some truth voxel lies strictly
    // between the camera and the voxel along the sight line.
    let blocked_before = |target: [usize; 3]| -> bool {
        let mut blocked = false;
        walk_segment(&geom, camera, geom.voxel_center(target), |idx, _, _| {
            if idx == target {
                return Walk::Stop;
            }
            if truth.get(idx) {
                blocked = true;
                return Walk::Stop;
            }
            Walk::Continue
        });
        blocked
    };

    let mut partial = VoxelGrid::new(geom);
    let mut free = VoxelGrid::new(geom);
    for idx in geom.iter_indices() {
        let center = geom.voxel_center(idx);
        if masked(center) {
            continue;
        }
        if blocked_before(idx) {
            continue;
        }
        if truth.get(idx) {
            partial.set(idx, true);
        } else {
            free.set(idx, true);
        }
    }
    if partial.is_empty() {
        return None;
    }

    // Recenter the partial's bounding box in the grid, then shift the
    // whole triple a fixed offset toward the camera (-y here).
    let (lo, hi) = partial.index_bounds().expect("partial nonempty");
    let mut shift = [0i64; 3];
    for a in 0..3 {
        let bbox_center = (lo[a] + hi[a]) as i64 / 2;
        shift[a] = n as i64 / 2 - bbox_center;
    }
    shift[1] -= cfg.shift_offset as i64;
    let partial = partial.shifted(shift);
    let free = free.shifted(shift);
    let truth = truth.shifted(shift);
    if partial.is_empty() || truth.is_empty() {
        return None;
    }
    let camera = camera
        + Vec3::new(
            shift[0] as f64 * res,
            shift[1] as f64 * res,
            shift[2] as f64 * res,
        );

    Some(DatasetTriple {
        partial,
        free,
        truth,
        camera,
        meta: TripleMeta {
            example_id,
            shape: shape_name.to_string(),
            rotation,
            rpy,
            occluder_fraction: cfg.occluder_fraction,
            seed,
        },
    })
}
