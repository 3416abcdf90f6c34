//! Deterministic tabletop object-search simulator and planning library.
//!
//! The crate models a robot searching for a hidden target on a cluttered
//! table: it renders depth observations of a voxelized scene, carves an
//! occupancy field, raycasts occlusion shadows, completes hidden object
//! volume behind a pluggable completer interface, carries volumetric
//! memory across manipulation steps, and greedily selects Push / Slide /
//! Pick actions by a multi-heuristic reward. An experiment harness runs
//! seeded episode matrices and reports move-count statistics.
//!
//! Everything is seedable and bit-reproducible: identical seeds produce
//! identical episodes, traces, and CSV output.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability, starting with `chamfer_basics` and ending with
//! `experiment_matrix`.

pub mod completion;
pub mod dynamics;
pub mod error;
pub mod geom;
pub mod harness;
pub mod memory;
pub mod occlusion;
pub mod planner;
pub mod rng;
pub mod scene;
pub mod voxel;

pub use error::{Error, Result};
