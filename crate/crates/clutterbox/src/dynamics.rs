//! Quasi-static simulation of action effects: the selected object moves
//! by its commanded transform, everything it (or the gripper) plows into
//! is displaced in the table plane until penetration-free, and objects
//! whose centroid leaves the table are ejected.
//!
//! Contact model: objects are equal-resolution voxel columns; two objects
//! touch when the minimum planar distance between their occupied column
//! centers drops below one voxel edge. No rotation from pushing, no
//! toppling, no friction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{RigidTransform, Vec3};
use crate::rng::Pcg32;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionKind {
    Push,
    Slide,
    Pick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ActionParams {
    /// 1D palm push: direction angle in the table plane and magnitude.
    Push { angle: f64, magnitude: f64 },
    /// Grasp and drag: planar transform of the object motion.
    Slide { dx: f64, dy: f64, dtheta: f64 },
    /// Full grasp: destination planar pose and lift height.
    Pick { x: f64, y: f64, yaw: f64, lift: f64 },
}

/// Where the hand first touches: a table-plane point and the approach
/// direction (pointing into the object).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspPose {
    pub point: [f64; 2],
    pub approach: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionInstance {
    pub kind: ActionKind,
    /// Planning segment the action was sampled for (trace bookkeeping).
    pub segment: usize,
    /// Ground-truth scene object the simulator moves.
    pub object: usize,
    pub params: ActionParams,
    pub grasp: GraspPose,
}

impl ActionInstance {
    /// The commanded world transform of the manipulated object. Rotations
    /// are taken about the object's current centroid.
    pub fn commanded_transform(&self, centroid: Vec3) -> RigidTransform {
        match self.params {
            ActionParams::Push { angle, magnitude } => {
                RigidTransform::translation(Vec3::new(
                    magnitude * angle.cos(),
                    magnitude * angle.sin(),
                    0.0,
                ))
            }
            ActionParams::Slide { dx, dy, dtheta } => {
                RigidTransform::yaw_about(centroid, dtheta, Vec3::new(dx, dy, 0.0))
            }
            ActionParams::Pick { x, y, yaw, .. } => {
                RigidTransform::yaw_about(
                    centroid,
                    yaw,
                    Vec3::new(x - centroid.x, y - centroid.y, 0.0),
                )
            }
        }
    }

    /// End-effector path in the table plane: start point plus waypoints.
    /// Pick transports above the clearance height, so only the grasp and
    /// set-down points can generate tabletop contact.
    pub fn hand_path(&self) -> Vec<[f64; 2]> {
        let g = self.grasp.point;
        match self.params {
            ActionParams::Push { angle, magnitude } => {
                vec![g, [g[0] + magnitude * angle.cos(), g[1] + magnitude * angle.sin()]]
            }
            ActionParams::Slide { dx, dy, .. } => vec![g, [g[0] + dx, g[1] + dy]],
            ActionParams::Pick { x, y, .. } => vec![g, [x, y]],
        }
    }

    /// Whether the hand path between waypoints stays at table level
    /// (sweeping contacts) or travels above the clutter.
    pub fn hand_sweeps_table(&self) -> bool {
        !matches!(self.kind, ActionKind::Pick)
    }
}

/// Disc-footprint hand model with a reach budget from the robot anchor.
#[derive(Debug, Clone, Copy)]
pub struct GripperModel {
    pub radius: f64,
    pub clearance_height: f64,
    pub reach: f64,
    /// Robot base anchor at the table edge.
    pub anchor: [f64; 2],
}

impl GripperModel {
    pub fn new(radius: f64, clearance_height: f64, reach: f64, anchor: [f64; 2]) -> Self {
        assert!(radius > 0.0 && reach > 0.0);
        GripperModel { radius, clearance_height, reach, anchor }
    }

    pub fn within_reach(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.anchor[0];
        let dy = p[1] - self.anchor[1];
        (dx * dx + dy * dy).sqrt() <= self.reach
    }
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel::new(0.05, 0.35, 1.1, [0.0, -0.6])
    }
}

#[derive(Debug, Clone)]
pub struct ActionOutcome {
    /// Distinct non-manipulated objects contacted by the moving object or
    /// the hand during the sweep.
    pub contact_count: usize,
    pub ejected: Vec<usize>,
    pub grasp_held: bool,
    /// Penetration resolution hit its iteration cap (reported, not silent).
    pub cap_hit: bool,
    /// Final poses of every object that moved, manipulated one included.
    pub moved: Vec<(usize, RigidTransform)>,
}

const RESOLUTION_CAP: usize = 64;

/// World-frame occupied column centers of an object's footprint.
fn world_footprint(scene: &Scene, idx: usize) -> Vec<[f64; 2]> {
    let obj = &scene.objects[idx];
    obj.footprint_cells()
        .iter()
        .map(|c| {
            let w = obj.pose.apply(Vec3::new(c[0], c[1], 0.0));
            [w.x, w.y]
        })
        .collect()
}

fn min_dist_sq(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let mut best = f64::INFINITY;
    for p in a {
        for q in b {
            let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
            if d < best {
                best = d;
            }
        }
    }
    best
}

fn point_min_dist_sq(p: [f64; 2], b: &[[f64; 2]]) -> f64 {
    let mut best = f64::INFINITY;
    for q in b {
        let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        if d < best {
            best = d;
        }
    }
    best
}

/// Two voxel objects touch when facing column centers come closer than
/// one voxel edge (equal resolution assumed).
fn objects_penetrate(res: f64, a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
    let threshold = res * (1.0 - 1e-9);
    min_dist_sq(a, b) < threshold * threshold
}

/// The hand disc touches an object when a column center comes within the
/// disc radius plus half a voxel.
fn gripper_penetrates(gripper: &GripperModel, res: f64, p: [f64; 2], cells: &[[f64; 2]]) -> bool {
    let threshold = (gripper.radius + 0.5 * res) * (1.0 - 1e-9);
    point_min_dist_sq(p, cells) < threshold * threshold
}

/// Count distinct non-manipulated objects the hand's swept disc touches
/// along the end-effector path. Pure prediction; does not move anything.
pub fn sweep_contacts(scene: &Scene, action: &ActionInstance, gripper: &GripperModel) -> usize {
    let res = scene.voxel.resolution;
    let path = action.hand_path();
    let samples = sample_hand_path(&path, res * 0.5, action.hand_sweeps_table());
    let mut contacts = std::collections::BTreeSet::new();
    for (i, _) in scene.active_objects() {
        if i == action.object {
            continue;
        }
        let cells = world_footprint(scene, i);
        if samples.iter().any(|&p| gripper_penetrates(gripper, res, p, &cells)) {
            contacts.insert(i);
        }
    }
    contacts.len()
}

/// Sample a polyline every `spacing`; when the hand travels above the
/// clutter only the waypoints themselves matter.
pub(crate) fn sample_hand_path(path: &[[f64; 2]], spacing: f64, sweep: bool) -> Vec<[f64; 2]> {
    if !sweep {
        return path.to_vec();
    }
    let mut out = vec![path[0]];
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let n = (len / spacing).ceil().max(1.0) as usize;
        for i in 1..=n {
            let t = i as f64 / n as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Execute the action on the scene, mutating object poses. Deterministic
/// given (scene, action, seed); the RNG only breaks degenerate
/// displacement directions.
pub fn apply_action(
    scene: &mut Scene,
    action: &ActionInstance,
    gripper: &GripperModel,
    rng: &mut Pcg32,
) -> Result<ActionOutcome> {
    let idx = action.object;
    if idx >= scene.objects.len() || scene.objects[idx].ejected {
        return Err(Error::InfeasibleAction(format!(
            "object index {idx} is not on the table"
        )));
    }
    let res = scene.voxel.resolution;
    let start_pose = scene.objects[idx].pose;
    let start_centroid = scene.objects[idx].centroid_world();
    let commanded = action.commanded_transform(start_centroid);
    let final_pose = commanded.compose(start_pose);

    // Object sweep schedule: interpolated poses for tabletop motion, or
    // grasp + set-down poses for a lifted transport.
    let schedule: Vec<RigidTransform> = match action.params {
        ActionParams::Push { magnitude, .. } => interpolate_poses(
            start_pose,
            start_centroid,
            commanded,
            (magnitude / (res * 0.5)).ceil() as usize,
        ),
        ActionParams::Slide { dx, dy, .. } => {
            let dist = (dx * dx + dy * dy).sqrt();
            interpolate_poses(
                start_pose,
                start_centroid,
                commanded,
                (dist / (res * 0.5)).ceil().max(1.0) as usize,
            )
        }
        ActionParams::Pick { .. } => vec![start_pose, final_pose],
    };

    // Hand positions paired to the object schedule.
    let hand_path = action.hand_path();
    let hand_at = |frac: f64| -> [f64; 2] {
        let (a, b) = (hand_path[0], hand_path[1]);
        [a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1])]
    };

    let mut contacts = std::collections::BTreeSet::new();
    let mut cap_hit = false;
    let steps = schedule.len();
    for (si, pose) in schedule.into_iter().enumerate() {
        scene.objects[idx].pose = pose;
        let frac = if steps <= 1 { 1.0 } else { si as f64 / (steps - 1) as f64 };
        let hand = if action.hand_sweeps_table() || si + 1 == steps || si == 0 {
            Some(hand_at(frac))
        } else {
            None
        };
        let hit_cap = resolve_penetrations(scene, idx, hand, gripper, rng, &mut contacts);
        cap_hit |= hit_cap;
    }

    // Ejection: centroid outside the table extent.
    let mut ejected = Vec::new();
    for i in 0..scene.objects.len() {
        if scene.objects[i].ejected {
            continue;
        }
        let c = scene.objects[i].centroid_world();
        if !scene.table.contains_xy(c.x, c.y) {
            scene.objects[i].ejected = true;
            ejected.push(i);
        }
    }

    let mut moved = vec![(idx, scene.objects[idx].pose)];
    for &i in &contacts {
        moved.push((i, scene.objects[i].pose));
    }
    Ok(ActionOutcome {
        contact_count: contacts.len(),
        ejected,
        grasp_held: matches!(action.kind, ActionKind::Slide | ActionKind::Pick),
        cap_hit,
        moved,
    })
}

/// Interpolated rigid poses from start to commanded∘start, rotating about
/// the starting centroid while translating linearly.
fn interpolate_poses(
    start: RigidTransform,
    centroid: Vec3,
    commanded: RigidTransform,
    steps: usize,
) -> Vec<RigidTransform> {
    let total_yaw = commanded.rot.m[1][0].atan2(commanded.rot.m[0][0]);
    let moved_centroid = commanded.apply(centroid);
    let delta = moved_centroid - centroid;
    let n = steps.max(1);
    let mut out = Vec::with_capacity(n + 1);
    out.push(start);
    for i in 1..=n {
        let f = i as f64 / n as f64;
        let step = if i == n {
            // Land exactly on the commanded pose.
            commanded
        } else {
            RigidTransform::yaw_about(centroid, total_yaw * f, delta.scale(f))
        };
        out.push(step.compose(start));
    }
    out
}

/// Repeatedly find the first penetrating pair and displace the victim in
/// the table plane until everything is separated or the cap is reached.
/// Returns true when the cap was hit.
fn resolve_penetrations(
    scene: &mut Scene,
    manipulated: usize,
    hand: Option<[f64; 2]>,
    gripper: &GripperModel,
    rng: &mut Pcg32,
    contacts: &mut std::collections::BTreeSet<usize>,
) -> bool {
    for _ in 0..RESOLUTION_CAP {
        let Some((source, victim)) = find_first_penetration(scene, manipulated, hand, gripper)
        else {
            return false;
        };
        contacts.insert(victim);
        displace(scene, source, victim, hand, gripper, rng);
    }
    true
}

/// Penetration source: the moving object / an already-displaced object, or
/// the hand disc.
#[derive(Debug, Clone, Copy)]
enum Source {
    Object(usize),
    Hand,
}

fn find_first_penetration(
    scene: &Scene,
    manipulated: usize,
    hand: Option<[f64; 2]>,
    gripper: &GripperModel,
) -> Option<(Source, usize)> {
    let res = scene.voxel.resolution;
    let active: Vec<usize> = scene.active_objects().map(|(i, _)| i).collect();
    let cells: std::collections::BTreeMap<usize, Vec<[f64; 2]>> = active
        .iter()
        .map(|&i| (i, world_footprint(scene, i)))
        .collect();

    // The hand never displaces the object it manipulates.
    if let Some(p) = hand {
        for &i in &active {
            if i != manipulated && gripper_penetrates(gripper, res, p, &cells[&i]) {
                return Some((Source::Hand, i));
            }
        }
    }
    // Manipulated object first, then cascaded pairs.
    for &i in &active {
        if i != manipulated && objects_penetrate(res, &cells[&manipulated], &cells[&i]) {
            return Some((Source::Object(manipulated), i));
        }
    }
    for (ai, &a) in active.iter().enumerate() {
        for &b in active.iter().skip(ai + 1) {
            if a == manipulated || b == manipulated {
                continue;
            }
            if objects_penetrate(res, &cells[&a], &cells[&b]) {
                return Some((Source::Object(a), b));
            }
        }
    }
    None
}

/// Push the victim away from the source along the centroid-to-centroid
/// direction (projected to the table plane) in quarter-voxel steps until
/// the pair separates.
fn displace(
    scene: &mut Scene,
    source: Source,
    victim: usize,
    hand: Option<[f64; 2]>,
    gripper: &GripperModel,
    rng: &mut Pcg32,
) {
    let res = scene.voxel.resolution;
    let vc = scene.objects[victim].centroid_world();
    let from = match source {
        Source::Object(i) => {
            let c = scene.objects[i].centroid_world();
            [c.x, c.y]
        }
        Source::Hand => hand.expect("hand source requires a hand point"),
    };
    let mut dir = [vc.x - from[0], vc.y - from[1]];
    let len = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    if len < 1e-9 {
        let a = rng.range_f64(0.0, 2.0 * std::f64::consts::PI);
        dir = [a.cos(), a.sin()];
    } else {
        dir = [dir[0] / len, dir[1] / len];
    }
    let step = res * 0.25;
    // Bounded by the pair's combined extent; separation must occur well
    // before this.
    for _ in 0..400 {
        let separated = match source {
            Source::Object(i) => {
                let a = world_footprint(scene, i);
                let b = world_footprint(scene, victim);
                !objects_penetrate(res, &a, &b)
            }
            Source::Hand => {
                let b = world_footprint(scene, victim);
                !gripper_penetrates(gripper, res, hand.unwrap(), &b)
            }
        };
        if separated {
            return;
        }
        let pose = scene.objects[victim].pose;
        scene.objects[victim].pose = RigidTransform::translation(Vec3::new(
            dir[0] * step,
            dir[1] * step,
            0.0,
        ))
        .compose(pose);
    }
}
