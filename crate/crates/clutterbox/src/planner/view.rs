//! Per-step belief construction: observe, segment, detect the target,
//! carve occupancy, complete shapes, apply memory, and compute shadows.

use super::PlannerConfig;
use crate::completion::{complete, CompletionInput};
use crate::dynamics::GraspPose;
use crate::geom::{convex_hull_2d, RigidTransform, Vec3};
use crate::memory::{
    apply_negative_memory, apply_positive_memory, carry_unobserved_prior, decay_unobserved,
};
use crate::occlusion::{compute_occlusions, ShadowSet};
use crate::rng::Pcg32;
use crate::scene::{
    carve_labeled, detect_target, render_observation, segment, segment_label, Observation,
    PixelLabel, Scene, SegmentMask, SegmentationNoiseModel, TargetClassifier, VoxelLabels,
    LABEL_NONE, LABEL_TABLE,
};
use crate::voxel::{OccupancyField, VoxelGrid};

/// One planning unit: a segment of the current observation with its
/// believed volume (observed surface plus completion claims).
#[derive(Debug, Clone)]
pub struct PlanSegment {
    /// Voxel label code of this segment in the field.
    pub code: u16,
    /// Ground-truth object indices merged into the segment.
    pub object_indices: Vec<usize>,
    /// The member owning the most pixels; the object the simulator moves
    /// when this segment is manipulated.
    pub exec_object: usize,
    /// Observed surface plus completion claims.
    pub believed: VoxelGrid,
    /// Directly observed surface voxels only.
    pub observed: VoxelGrid,
    pub centroid: Vec3,
    /// World (x, y) centers of the believed volume's occupied columns.
    pub footprint: Vec<[f64; 2]>,
    /// Convex hull of the footprint, counter-clockwise.
    pub hull: Vec<[f64; 2]>,
    /// Grasp poses sampled on the hull boundary, approach normal inward.
    pub grasps: Vec<GraspPose>,
    pub is_target: bool,
}

/// Belief carried between steps for the memory rules.
#[derive(Debug, Clone, Default)]
pub struct EpisodeMemory {
    pub prev_field: Option<OccupancyField>,
    /// Believed volume of the segment moved last step and its commanded
    /// transform.
    pub prev_moved: Option<(VoxelGrid, RigidTransform)>,
}

#[derive(Debug, Clone)]
pub struct PlanningView {
    pub field: OccupancyField,
    pub labels: VoxelLabels,
    pub shadows: ShadowSet,
    pub segments: Vec<PlanSegment>,
    pub target_segment: Option<usize>,
    pub obs_digest: u64,
}

impl PlanningView {
    pub fn segment_by_code(&self, code: u16) -> Option<&PlanSegment> {
        self.segments.iter().find(|s| s.code == code)
    }
}

/// Build the belief for the current scene state. Draws from `rng` only
/// when segmentation noise is enabled.
pub fn build_view(
    scene: &Scene,
    config: &PlannerConfig,
    memory: &EpisodeMemory,
    rng: &mut Pcg32,
    timings: Option<&mut super::StageTimings>,
) -> PlanningView {
    let mut clock = StageClock::new(timings);
    let obs = render_observation(scene);
    let obs_digest = obs.digest();
    clock.lap(|t| &mut t.observe);

    let noise = SegmentationNoiseModel { p_merge: config.p_merge };
    let masks = segment(&obs, &noise, rng);
    let classifier = TargetClassifier::new(scene.target_object().color, config.tau_target);
    let target_mask = detect_target(&obs, &classifier);
    clock.lap(|t| &mut t.segment);

    // Per-pixel label codes: one per segment, in mask order.
    let mut pixel_codes = vec![LABEL_NONE; obs.pixel_count()];
    for (pix, label) in obs.labels.iter().enumerate() {
        if *label == PixelLabel::Table {
            pixel_codes[pix] = LABEL_TABLE;
        }
    }
    for (si, mask) in masks.iter().enumerate() {
        for &pix in &mask.pixels {
            pixel_codes[pix] = segment_label(si);
        }
    }
    let geom = scene.workspace_geometry();
    let (mut field, mut labels) =
        carve_labeled(&obs, &scene.camera, geom, config.tau_occupancy, &pixel_codes);
    clock.lap(|t| &mut t.carve);

    // Memory: carry the previous belief into currently-unobserved space
    // before any claims refine it.
    let mem_cfg = config.memory_config();
    if config.memory {
        if let Some(prev) = &memory.prev_field {
            carry_unobserved_prior(prev, &mut field).expect("fields share geometry");
        }
    }

    // Completion claims per segment (observation wins; claims only fill
    // unknown voxels).
    let mut observed_grids: Vec<VoxelGrid> = Vec::with_capacity(masks.len());
    let mut believed: Vec<VoxelGrid> = Vec::with_capacity(masks.len());
    let completer = config
        .completion
        .build(scene.camera.position, config.camera_extrude_depth);
    let free = field.free_grid();
    for (si, _) in masks.iter().enumerate() {
        let code = segment_label(si);
        let observed = labels.grid_for(code);
        let mut segment_belief = observed.clone();
        if let Some(completer) = &completer {
            if !observed.is_empty() {
                let input = CompletionInput::new(observed.clone(), free.clone())
                    .expect("observed and free are disjoint by construction");
                if let Ok(result) = complete(completer.as_ref(), &input) {
                    for idx in result.completed.iter_set() {
                        let l = geom.linear(idx);
                        if field.claim_occupied(l) {
                            labels.set_linear(l, code);
                        }
                        segment_belief.set_linear(l, true);
                    }
                }
            }
        }
        observed_grids.push(observed);
        believed.push(segment_belief);
    }
    clock.lap(|t| &mut t.complete);

    if config.memory {
        if mem_cfg.positive_enabled {
            if let Some((prev_grid, transform)) = &memory.prev_moved {
                // Claims keep no segment label: they are remembered volume,
                // selectable only through whatever currently occludes them.
                apply_positive_memory(prev_grid, *transform, &mut field);
            }
        }
        if mem_cfg.negative_enabled {
            if let Some(prev) = &memory.prev_field {
                apply_negative_memory(prev, &mut field).expect("fields share geometry");
            }
        }
        decay_unobserved(&mut field, &mem_cfg, 1);
    }
    clock.lap(|t| &mut t.memory);

    let shadows = compute_occlusions(&field, &scene.camera);
    clock.lap(|t| &mut t.shadows);

    let segments = build_segments(config, &masks, &observed_grids, &believed, &target_mask, &obs);
    let target_segment = segments.iter().position(|s| s.is_target);

    PlanningView { field, labels, shadows, segments, target_segment, obs_digest }
}

fn build_segments(
    config: &PlannerConfig,
    masks: &[SegmentMask],
    observed_grids: &[VoxelGrid],
    believed: &[VoxelGrid],
    target_mask: &[bool],
    obs: &Observation,
) -> Vec<PlanSegment> {
    let mut out = Vec::with_capacity(masks.len());
    for (si, mask) in masks.iter().enumerate() {
        let belief = &believed[si];
        if belief.is_empty() {
            continue;
        }
        // Majority pixel owner executes the motion.
        let exec_object = *mask
            .object_indices
            .iter()
            .max_by_key(|&&o| {
                mask.pixels
                    .iter()
                    .filter(|&&p| obs.labels[p] == PixelLabel::Object(o as u16))
                    .count()
            })
            .expect("segments have at least one member");

        let pts = belief.sparse_points();
        let mut c = Vec3::ZERO;
        for p in pts.iter() {
            c = c + *p;
        }
        let centroid = c.scale(1.0 / pts.len() as f64);

        let geom = belief.geometry();
        let mut columns = std::collections::BTreeSet::new();
        for idx in belief.iter_set() {
            columns.insert((idx[0], idx[1]));
        }
        let footprint: Vec<[f64; 2]> = columns
            .iter()
            .map(|&(x, y)| {
                let p = geom.voxel_center([x, y, 0]);
                [p.x, p.y]
            })
            .collect();
        let hull = convex_hull_2d(&footprint);
        let grasps = sample_hull_grasps(&hull, config.grasp_samples);
        let is_target = mask.pixels.iter().any(|&p| target_mask[p]);

        out.push(PlanSegment {
            code: segment_label(si),
            object_indices: mask.object_indices.clone(),
            exec_object,
            believed: belief.clone(),
            observed: observed_grids[si].clone(),
            centroid,
            footprint,
            hull,
            grasps,
            is_target,
        });
    }
    out
}

/// Evenly spaced grasp poses along the hull perimeter; the approach points
/// inward (normal to the hull edge).
pub fn sample_hull_grasps(hull: &[[f64; 2]], count: usize) -> Vec<GraspPose> {
    if hull.is_empty() || count == 0 {
        return Vec::new();
    }
    if hull.len() == 1 {
        return vec![GraspPose { point: hull[0], approach: 0.0 }];
    }
    let n = hull.len();
    let mut edge_len = Vec::with_capacity(n);
    let mut perimeter = 0.0;
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let l = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        edge_len.push(l);
        perimeter += l;
    }
    if perimeter <= 0.0 {
        return vec![GraspPose { point: hull[0], approach: 0.0 }];
    }
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut s = perimeter * (k as f64 + 0.5) / count as f64;
        let mut i = 0;
        while s > edge_len[i] && i + 1 < n {
            s -= edge_len[i];
            i += 1;
        }
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let l = edge_len[i].max(1e-12);
        let t = (s / l).clamp(0.0, 1.0);
        let point = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        // CCW hull: the interior lies to the left of edge (a -> b), so the
        // inward approach direction is the edge rotated +90 degrees.
        let approach = (b[0] - a[0]).atan2(-(b[1] - a[1]));
        out.push(GraspPose { point, approach });
    }
    out
}

/// Measures stage wall-clock into an optional timing sink.
struct StageClock<'a> {
    timings: Option<&'a mut super::StageTimings>,
    last: std::time::Instant,
}

impl<'a> StageClock<'a> {
    fn new(timings: Option<&'a mut super::StageTimings>) -> Self {
        StageClock { timings, last: std::time::Instant::now() }
    }

    fn lap(&mut self, pick: impl Fn(&mut super::StageTimings) -> &mut f64) {
        let now = std::time::Instant::now();
        if let Some(t) = self.timings.as_deref_mut() {
            *pick(t) += (now - self.last).as_secs_f64();
        }
        self.last = now;
    }
}
