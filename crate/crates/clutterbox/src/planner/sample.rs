//! Candidate generation: sample (kind, object, parameters, grasp) tuples,
//! filter by feasibility, score with the reward, return the argmax.

use super::rewards::{
    attribute_shadows, dispersion, direction, info_gain, predicted_sweep_contacts, reward,
    MovedVolume, RewardBreakdown, ShadowAttribution,
};
use super::view::{PlanSegment, PlanningView};
use super::PlannerConfig;
use crate::dynamics::{ActionInstance, ActionKind, ActionParams, GraspPose, GripperModel};
use crate::error::{Error, Result};
use crate::occlusion::{raycast, select_object};
use crate::rng::Pcg32;
use crate::scene::{Camera, Table};

#[derive(Debug, Clone)]
pub struct Candidate {
    pub index: usize,
    /// None when the sample died before producing an action (no segment
    /// selectable, no grasp available).
    pub action: Option<ActionInstance>,
    pub segment_index: Option<usize>,
    pub feasible: bool,
    pub reward: Option<RewardBreakdown>,
}

/// Minimum planar distance from a point to any believed footprint cell of
/// segments other than `exclude`, as (distance², blocking segment).
fn nearest_other_cell(
    segments: &[PlanSegment],
    exclude: usize,
    p: [f64; 2],
) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, s) in segments.iter().enumerate() {
        if i == exclude {
            continue;
        }
        for q in &s.footprint {
            let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, i));
            }
        }
    }
    best
}

/// Hand collision test at a grasp/push pose: the disc must not touch any
/// believed volume other than the selected segment's.
fn hand_pose_blocked(
    segments: &[PlanSegment],
    exclude: usize,
    p: [f64; 2],
    gripper: &GripperModel,
    resolution: f64,
) -> Option<usize> {
    let threshold = (gripper.radius + 0.5 * resolution) * (1.0 - 1e-9);
    match nearest_other_cell(segments, exclude, p) {
        Some((d, who)) if d < threshold * threshold => Some(who),
        _ => None,
    }
}

/// The feasibility test: the initial hand pose must be collision-free
/// (selected object excepted) and every path waypoint within reach.
/// Collisions later along the path are allowed and priced by the reward.
pub fn feasibility(
    view: &PlanningView,
    segment_index: usize,
    action: &ActionInstance,
    gripper: &GripperModel,
    resolution: f64,
) -> bool {
    let path = action.hand_path();
    if !path.iter().all(|&p| gripper.within_reach(p)) {
        return false;
    }
    hand_pose_blocked(&view.segments, segment_index, action.grasp.point, gripper, resolution)
        .is_none()
}

/// Palm placement for a push along `angle`: the hand starts just behind
/// the hull's support point opposite the push direction.
pub fn push_start(segment: &PlanSegment, angle: f64, gripper: &GripperModel) -> GraspPose {
    let dir = [angle.cos(), angle.sin()];
    let support = segment
        .hull
        .iter()
        .copied()
        .max_by(|a, b| {
            let da = -(a[0] * dir[0] + a[1] * dir[1]);
            let db = -(b[0] * dir[0] + b[1] * dir[1]);
            da.partial_cmp(&db).unwrap()
        })
        .unwrap_or([segment.centroid.x, segment.centroid.y]);
    GraspPose {
        point: [support[0] - dir[0] * gripper.radius, support[1] - dir[1] * gripper.radius],
        approach: angle,
    }
}

/// First grasp of the target that is within reach and collision-free, if
/// any — the "just pick it" test.
pub fn target_graspable(
    view: &PlanningView,
    target_index: usize,
    gripper: &GripperModel,
    resolution: f64,
) -> Option<GraspPose> {
    let target = &view.segments[target_index];
    target
        .grasps
        .iter()
        .find(|g| {
            gripper.within_reach(g.point)
                && hand_pose_blocked(&view.segments, target_index, g.point, gripper, resolution)
                    .is_none()
        })
        .copied()
}

/// Blocking weight of one obstructor: proportional to the grasp poses it
/// obstructs, scaled up by the target volume it hides. Multiplicative so
/// an object obstructing no grasp pose is never "blocking".
pub fn blocker_weight(poses_obstructed: usize, target_voxels_occluded: usize) -> f64 {
    poses_obstructed as f64 * (1.0 + target_voxels_occluded as f64)
}

#[derive(Debug, Clone, Default)]
pub struct TargetBlocking {
    /// (segment label code, weight), ascending by code.
    pub blockers: Vec<(u16, f64)>,
}

/// Identify which segments keep a partially-visible target ungraspable
/// and weigh them by obstructed grasp poses and hidden target volume.
pub fn compute_target_blocking(
    view: &PlanningView,
    target_index: usize,
    gripper: &GripperModel,
    resolution: f64,
    camera: &Camera,
) -> TargetBlocking {
    let target = &view.segments[target_index];
    let mut poses: std::collections::BTreeMap<u16, usize> = Default::default();
    for g in &target.grasps {
        if !gripper.within_reach(g.point) {
            continue;
        }
        if let Some(who) =
            hand_pose_blocked(&view.segments, target_index, g.point, gripper, resolution)
        {
            *poses.entry(view.segments[who].code).or_insert(0) += 1;
        }
    }
    // Hidden target volume attributed per occluder.
    let mut occluded: std::collections::BTreeMap<u16, usize> = Default::default();
    if let Ok(hidden) = target.believed.difference(&target.observed) {
        let geom = view.field.geometry();
        for idx in hidden.iter_set() {
            if let Some(blocker) = raycast(&view.field, camera.position, geom.voxel_center(idx)) {
                let code = view.labels.code_linear(geom.linear(blocker));
                if code > crate::scene::LABEL_TABLE && code != target.code {
                    *occluded.entry(code).or_insert(0) += 1;
                }
            }
        }
    }
    let blockers = poses
        .iter()
        .map(|(&code, &n)| (code, blocker_weight(n, occluded.get(&code).copied().unwrap_or(0))))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    TargetBlocking { blockers }
}

/// The object-selection rule when a visible target cannot be grasped:
/// with probability `tau_greedy` pick among the blockers (weighted),
/// otherwise fall through to normal shadow-driven selection.
pub fn select_segment_with_blocking<F>(
    blocking: &TargetBlocking,
    tau_greedy: f64,
    rng: &mut Pcg32,
    fallback: F,
) -> Result<u16>
where
    F: FnOnce(&mut Pcg32) -> Result<u16>,
{
    if !blocking.blockers.is_empty() && rng.chance(tau_greedy) {
        let weights: Vec<f64> = blocking.blockers.iter().map(|(_, w)| *w).collect();
        Ok(blocking.blockers[rng.weighted(&weights)].0)
    } else {
        fallback(rng)
    }
}

/// Draw every candidate for one decision. The RNG stream is strictly
/// sequential, so replaying with the same seed reproduces every sample.
pub fn sample_candidates(
    view: &PlanningView,
    table: &Table,
    camera: &Camera,
    config: &PlannerConfig,
    rng: &mut Pcg32,
) -> Vec<Candidate> {
    let gripper = config.gripper_model();
    let resolution = view.field.geometry().resolution;
    let blocking = view
        .target_segment
        .map(|ti| compute_target_blocking(view, ti, &gripper, resolution, camera));
    let mut attributions: std::collections::BTreeMap<u16, ShadowAttribution> = Default::default();
    let mut out = Vec::with_capacity(config.n_samples);

    for index in 0..config.n_samples {
        let kind = match rng.below(3) {
            0 => ActionKind::Push,
            1 => ActionKind::Slide,
            _ => ActionKind::Pick,
        };

        // Object selection: attack a visible-but-blocked target's
        // blockers with probability tau_greedy, else sample shadows.
        let shadow_fallback = |rng: &mut Pcg32| -> Result<u16> {
            if view.shadows.is_empty() {
                if view.segments.is_empty() {
                    return Err(Error::NoSelectableObject { retries: 0 });
                }
                Ok(view.segments[rng.below(view.segments.len())].code)
            } else {
                select_object(&view.shadows, &view.labels, rng)
            }
        };
        let code = match &blocking {
            Some(b) => select_segment_with_blocking(b, config.tau_greedy, rng, shadow_fallback),
            None => shadow_fallback(rng),
        };
        let Ok(code) = code else {
            out.push(Candidate {
                index,
                action: None,
                segment_index: None,
                feasible: false,
                reward: None,
            });
            continue;
        };
        let Some(seg_index) = view.segments.iter().position(|s| s.code == code) else {
            out.push(Candidate {
                index,
                action: None,
                segment_index: None,
                feasible: false,
                reward: None,
            });
            continue;
        };
        let segment = &view.segments[seg_index];

        // Parameters and grasp.
        let tau = 2.0 * std::f64::consts::PI;
        let (params, grasp) = match kind {
            ActionKind::Push => {
                let angle = rng.range_f64(0.0, tau);
                let magnitude = rng.range_f64(config.push_magnitude[0], config.push_magnitude[1]);
                (ActionParams::Push { angle, magnitude }, Some(push_start(segment, angle, &gripper)))
            }
            ActionKind::Slide => {
                let angle = rng.range_f64(0.0, tau);
                let dist = rng.range_f64(0.0, config.slide_max_translation);
                let dtheta =
                    rng.range_f64(-config.slide_max_rotation, config.slide_max_rotation);
                let grasp = if segment.grasps.is_empty() {
                    None
                } else {
                    Some(segment.grasps[rng.below(segment.grasps.len())])
                };
                (
                    ActionParams::Slide { dx: dist * angle.cos(), dy: dist * angle.sin(), dtheta },
                    grasp,
                )
            }
            ActionKind::Pick => {
                let x = rng.range_f64(-table.extent[0] * 0.45, table.extent[0] * 0.45);
                let y = rng.range_f64(-table.extent[1] * 0.45, table.extent[1] * 0.45);
                let yaw = rng.range_f64(0.0, tau);
                let grasp = if segment.grasps.is_empty() {
                    None
                } else {
                    Some(segment.grasps[rng.below(segment.grasps.len())])
                };
                (ActionParams::Pick { x, y, yaw, lift: config.pick_lift }, grasp)
            }
        };
        let Some(grasp) = grasp else {
            out.push(Candidate {
                index,
                action: None,
                segment_index: Some(seg_index),
                feasible: false,
                reward: None,
            });
            continue;
        };
        let action = ActionInstance {
            kind,
            segment: seg_index,
            object: segment.exec_object,
            params,
            grasp,
        };

        let mut feasible = feasibility(view, seg_index, &action, &gripper, resolution);
        let transform = action.commanded_transform(segment.centroid);
        if feasible {
            if let ActionParams::Pick { .. } = action.params {
                // Set-down footprint must be clear of other believed volume.
                feasible = pick_destination_clear(view, seg_index, transform, resolution);
            }
        }
        if !feasible {
            out.push(Candidate {
                index,
                action: Some(action),
                segment_index: Some(seg_index),
                feasible: false,
                reward: None,
            });
            continue;
        }

        // Score.
        let attribution = attributions.entry(code).or_insert_with(|| {
            attribute_shadows(&view.field, &view.labels, &view.shadows, camera, code)
        });
        let moved = MovedVolume::new(view.field.geometry(), &segment.believed, transform);
        let v1 = info_gain(&view.field, &view.labels, camera, attribution, &moved, transform) as f64;
        let v2 = dispersion(&view.segments, seg_index, transform);
        let v3 = direction(&view.segments, seg_index, transform);
        let v4 = predicted_sweep_contacts(&view.segments, seg_index, &action, &gripper, resolution)
            as f64;
        let breakdown = reward(&config.weights, v1, v2, v3, v4);
        out.push(Candidate {
            index,
            action: Some(action),
            segment_index: Some(seg_index),
            feasible: true,
            reward: Some(breakdown),
        });
    }
    out
}

fn pick_destination_clear(
    view: &PlanningView,
    seg_index: usize,
    transform: crate::geom::RigidTransform,
    resolution: f64,
) -> bool {
    let threshold = resolution * (1.0 - 1e-9);
    let segment = &view.segments[seg_index];
    for cell in &segment.footprint {
        let p = transform.apply(crate::geom::Vec3::new(cell[0], cell[1], 0.0));
        if let Some((d, _)) = nearest_other_cell(&view.segments, seg_index, [p.x, p.y]) {
            if d < threshold * threshold {
                return false;
            }
        }
    }
    true
}

/// Sample `n_samples` candidates and return the feasible one with maximal
/// reward (ties: earliest index), plus the full sample list for tracing.
pub fn gen_motion(
    view: &PlanningView,
    table: &Table,
    camera: &Camera,
    config: &PlannerConfig,
    rng: &mut Pcg32,
) -> Result<(Candidate, Vec<Candidate>)> {
    assert!(config.n_samples >= 1);
    let candidates = sample_candidates(view, table, camera, config, rng);
    let best = candidates
        .iter()
        .filter(|c| c.feasible)
        .max_by(|a, b| {
            let ra = a.reward.as_ref().unwrap().total;
            let rb = b.reward.as_ref().unwrap().total;
            // Strictly-greater comparison keeps the earliest index on ties.
            ra.partial_cmp(&rb)
                .unwrap()
                .then(b.index.cmp(&a.index))
        })
        .cloned();
    match best {
        Some(c) => Ok((c, candidates)),
        None => Err(Error::NoFeasibleAction { samples: config.n_samples }),
    }
}
