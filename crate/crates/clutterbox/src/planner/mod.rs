//! Action sampling, feasibility, the four-heuristic reward, moving-shadow
//! information gain, and the greedy episode loop.

mod episode;
mod rewards;
mod sample;
mod view;

pub use episode::{run_episode, EpisodeTrace, StageTimings, StepRecord, TerminalStatus};
pub use rewards::{dispersion, direction, info_gain, predicted_sweep_contacts, reward, RewardBreakdown};
pub use sample::{
    blocker_weight, compute_target_blocking, gen_motion, sample_candidates,
    select_segment_with_blocking, target_graspable as target_graspable_grasp, Candidate,
    TargetBlocking,
};
pub use view::{build_view, EpisodeMemory, PlanSegment, PlanningView};

// The action vocabulary lives next to the simulator that executes it.
pub use crate::dynamics::{ActionInstance, ActionKind, ActionParams, GraspPose, GripperModel};

use serde::{Deserialize, Serialize};

use crate::completion::CompleterKind;

/// Linear weights of the four reward heuristics: information (dis-occluded
/// voxel count), dispersion (centroid spread), direction (motion away from
/// the clutter's center of mass), collision (swept-hand contact count).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub info: f64,
    pub dispersion: f64,
    pub direction: f64,
    pub collision: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            info: 1.0 / 2000.0,
            dispersion: 1.0,
            direction: 3.0,
            collision: -5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    /// Candidates sampled per decision.
    pub n_samples: usize,
    /// Probability of attacking a visible-but-blocked target's blockers.
    pub tau_greedy: f64,
    pub tau_occupancy: f64,
    pub tau_target: f64,
    pub weights: RewardWeights,
    /// Push magnitude bounds in meters.
    pub push_magnitude: [f64; 2],
    /// Maximum slide translation in meters and rotation in radians.
    pub slide_max_translation: f64,
    pub slide_max_rotation: f64,
    pub pick_lift: f64,
    /// Grasp poses sampled on each segment's hull boundary.
    pub grasp_samples: usize,
    pub completion: CompleterKind,
    /// Depth budget (voxels) for the camera-extrude completer.
    pub camera_extrude_depth: usize,
    /// Volumetric memory (positive + negative + decay) on or off.
    pub memory: bool,
    pub memory_alpha: f64,
    /// Segmentation merge-noise probability.
    pub p_merge: f64,
    pub gripper: GripperToml,
    /// Re-invocations of the candidate sampler when every sample is
    /// infeasible, before the episode gives up.
    pub gen_retries: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            n_samples: 200,
            tau_greedy: 0.9,
            tau_occupancy: 0.5,
            tau_target: 0.5,
            weights: RewardWeights::default(),
            push_magnitude: [0.05, 0.25],
            slide_max_translation: 0.3,
            slide_max_rotation: std::f64::consts::FRAC_PI_2,
            pick_lift: 0.2,
            grasp_samples: 16,
            completion: CompleterKind::Off,
            camera_extrude_depth: 16,
            memory: false,
            memory_alpha: 0.9,
            p_merge: 0.0,
            gripper: GripperToml::default(),
            gen_retries: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GripperToml {
    pub radius: f64,
    pub clearance_height: f64,
    pub reach: f64,
    pub anchor: [f64; 2],
}

impl Default for GripperToml {
    fn default() -> Self {
        GripperToml { radius: 0.05, clearance_height: 0.35, reach: 1.1, anchor: [0.0, -0.6] }
    }
}

impl PlannerConfig {
    pub fn gripper_model(&self) -> GripperModel {
        GripperModel::new(
            self.gripper.radius,
            self.gripper.clearance_height,
            self.gripper.reach,
            self.gripper.anchor,
        )
    }

    pub fn memory_config(&self) -> crate::memory::MemoryConfig {
        if self.memory {
            crate::memory::MemoryConfig::enabled(self.memory_alpha, self.tau_occupancy)
        } else {
            crate::memory::MemoryConfig::disabled()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_weights_are_the_reference_values() {
        let w = RewardWeights::default();
        assert_eq!(w.info, 1.0 / 2000.0);
        assert_eq!(w.dispersion, 1.0);
        assert_eq!(w.direction, 3.0);
        assert_eq!(w.collision, -5.0);
    }

    #[test]
    fn config_roundtrips_through_toml() {
        let mut cfg = PlannerConfig::default();
        cfg.n_samples = 64;
        cfg.completion = CompleterKind::PrismHull;
        cfg.memory = true;
        let text = toml::to_string(&cfg).unwrap();
        let back: PlannerConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let text = "n_samples = 10\nbanana = 3\n";
        assert!(toml::from_str::<PlannerConfig>(text).is_err());
    }
}
