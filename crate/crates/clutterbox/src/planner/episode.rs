//! The greedy episode loop: observe, believe, act, repeat until the
//! target is retrieved, ejected, or the move budget runs out.

use serde::{Deserialize, Serialize};

use super::rewards::RewardBreakdown;
use super::sample::{gen_motion, target_graspable};
use super::view::{build_view, EpisodeMemory};
use super::PlannerConfig;
use crate::dynamics::{apply_action, ActionInstance, ActionKind, ActionParams};
use crate::rng::Pcg32;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    /// The final action picked the target.
    Success,
    /// The target left the workspace during manipulation.
    Ejected,
    /// More than three actions per scene object would have been needed.
    MoveLimit,
}

/// Per-step wall-clock seconds by pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub observe: f64,
    pub segment: f64,
    pub carve: f64,
    pub complete: f64,
    pub memory: f64,
    pub shadows: f64,
    pub plan: f64,
    pub execute: f64,
}

impl StageTimings {
    pub fn sum(&self) -> f64 {
        self.observe
            + self.segment
            + self.carve
            + self.complete
            + self.memory
            + self.shadows
            + self.plan
            + self.execute
    }

    pub const STAGES: [&'static str; 8] = [
        "observe", "segment", "carve", "complete", "memory", "shadows", "plan", "execute",
    ];

    pub fn by_stage(&self) -> [f64; 8] {
        [
            self.observe,
            self.segment,
            self.carve,
            self.complete,
            self.memory,
            self.shadows,
            self.plan,
            self.execute,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub obs_digest: u64,
    /// Label code of the manipulated segment.
    pub segment_code: u16,
    /// Ground-truth id of the executed object.
    pub exec_object: String,
    pub action: ActionInstance,
    pub reward: Option<RewardBreakdown>,
    /// True for the terminal pick of a graspable target (not sampled).
    pub greedy_target_pick: bool,
    pub contact_count: usize,
    pub ejected: Vec<String>,
    pub cap_hit: bool,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub scene_name: String,
    pub seed: u64,
    pub config: PlannerConfig,
    pub steps: Vec<StepRecord>,
    pub status: TerminalStatus,
    pub moves: usize,
    /// The planner ran out of feasible samples before the move limit.
    pub starved: bool,
    pub total_seconds: f64,
    /// Scene file text for self-contained replay (filled by the harness).
    pub scene_toml: Option<String>,
}

impl EpisodeTrace {
    /// Compare the deterministic content of two traces; timing fields are
    /// ignored. Returns human-readable mismatch descriptions.
    pub fn replay_diff(&self, other: &EpisodeTrace) -> Vec<String> {
        let mut diffs = Vec::new();
        if self.status != other.status {
            diffs.push(format!("status: {:?} vs {:?}", self.status, other.status));
        }
        if self.moves != other.moves {
            diffs.push(format!("moves: {} vs {}", self.moves, other.moves));
        }
        if self.seed != other.seed {
            diffs.push(format!("seed: {} vs {}", self.seed, other.seed));
        }
        if self.steps.len() != other.steps.len() {
            diffs.push(format!("step count: {} vs {}", self.steps.len(), other.steps.len()));
        }
        for (a, b) in self.steps.iter().zip(&other.steps) {
            if a.obs_digest != b.obs_digest {
                diffs.push(format!("step {}: observation digest differs", a.step));
            }
            if a.action != b.action {
                diffs.push(format!("step {}: action differs", a.step));
            }
            if a.reward != b.reward {
                diffs.push(format!("step {}: reward differs", a.step));
            }
            if a.segment_code != b.segment_code || a.exec_object != b.exec_object {
                diffs.push(format!("step {}: selected object differs", a.step));
            }
            if a.contact_count != b.contact_count
                || a.ejected != b.ejected
                || a.cap_hit != b.cap_hit
            {
                diffs.push(format!("step {}: outcome differs", a.step));
            }
        }
        diffs
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> crate::error::Result<EpisodeTrace> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::Parse {
            file: "trace".into(),
            message: e.to_string(),
        })
    }
}

/// Run one seeded episode on a copy of the scene.
pub fn run_episode(scene: &Scene, config: &PlannerConfig, seed: u64) -> EpisodeTrace {
    let episode_start = std::time::Instant::now();
    let mut scene = scene.clone();
    let mut rng = Pcg32::new(seed);
    let gripper = config.gripper_model();
    let resolution = scene.voxel.resolution;
    let n_obj = scene.objects.iter().filter(|o| !o.ejected).count();
    let move_limit = 3 * n_obj;
    let mut memory = EpisodeMemory::default();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut status = None;
    let mut starved = false;

    while steps.len() < move_limit {
        let mut timings = StageTimings::default();
        let view = build_view(&scene, config, &memory, &mut rng, Some(&mut timings));

        // Greedy grab: a visible, reachable, unblocked target ends the
        // episode with a pick.
        if let Some(ti) = view.target_segment {
            if let Some(grasp) = target_graspable(&view, ti, &gripper, resolution) {
                let segment = &view.segments[ti];
                let c = segment.centroid;
                let action = ActionInstance {
                    kind: ActionKind::Pick,
                    segment: ti,
                    object: segment.exec_object,
                    params: ActionParams::Pick { x: c.x, y: c.y, yaw: 0.0, lift: config.pick_lift },
                    grasp,
                };
                steps.push(StepRecord {
                    step: steps.len(),
                    obs_digest: view.obs_digest,
                    segment_code: segment.code,
                    exec_object: scene.objects[segment.exec_object].id.clone(),
                    action,
                    reward: None,
                    greedy_target_pick: true,
                    contact_count: 0,
                    ejected: Vec::new(),
                    cap_hit: false,
                    timings,
                });
                status = Some(TerminalStatus::Success);
                break;
            }
        }

        // Plan with a bounded retry budget when every sample is infeasible.
        let plan_start = std::time::Instant::now();
        let mut planned = None;
        for _ in 0..=config.gen_retries {
            match gen_motion(&view, &scene.table, &scene.camera, config, &mut rng) {
                Ok((best, _)) => {
                    planned = Some(best);
                    break;
                }
                Err(_) => continue,
            }
        }
        timings.plan = (std::time::Instant::now() - plan_start).as_secs_f64();
        let Some(best) = planned else {
            // Starved: no feasible action exists for this planner; the
            // episode can make no further progress.
            starved = true;
            status = Some(TerminalStatus::MoveLimit);
            break;
        };
        let action = best.action.expect("feasible candidate has an action");
        let seg_index = best.segment_index.expect("feasible candidate has a segment");
        let segment = &view.segments[seg_index];

        // Execute on the ground-truth scene.
        let exec_start = std::time::Instant::now();
        let commanded = action.commanded_transform(segment.centroid);
        let outcome = apply_action(&mut scene, &action, &gripper, &mut rng)
            .expect("feasible actions execute");
        timings.execute = (std::time::Instant::now() - exec_start).as_secs_f64();

        let target_ejected = outcome.ejected.contains(&scene.target);
        steps.push(StepRecord {
            step: steps.len(),
            obs_digest: view.obs_digest,
            segment_code: segment.code,
            exec_object: scene.objects[action.object].id.clone(),
            action,
            reward: best.reward,
            greedy_target_pick: false,
            contact_count: outcome.contact_count,
            ejected: outcome.ejected.iter().map(|&i| scene.objects[i].id.clone()).collect(),
            cap_hit: outcome.cap_hit,
            timings,
        });

        if target_ejected {
            status = Some(TerminalStatus::Ejected);
            break;
        }

        // Memory for the next step: the belief this step ended with, and
        // the moved segment's believed volume under its commanded motion.
        memory = EpisodeMemory {
            prev_field: Some(view.field.clone()),
            prev_moved: Some((segment.believed.clone(), commanded)),
        };
    }

    let status = status.unwrap_or(TerminalStatus::MoveLimit);
    EpisodeTrace {
        scene_name: scene.name.clone(),
        seed,
        config: config.clone(),
        moves: steps.len(),
        steps,
        status,
        starved,
        total_seconds: (std::time::Instant::now() - episode_start).as_secs_f64(),
        scene_toml: None,
    }
}
