//! Shape completion behind a pluggable interface: the feasibility
//! constraints (observed surface kept, known free space excluded),
//! geometric baseline completers, an out-of-process completer seam,
//! occluded-dataset synthesis, and the evaluation harness.

mod dataset;
mod eval;
mod primitive;
mod synth;

pub use dataset::{load_dataset, save_dataset};
pub use eval::{evaluate_completer, EvalRow, EvalStats};
pub use primitive::{voxelize_primitive, PrimitiveSpec};
pub use synth::{synthesize_dataset, DatasetTriple, SynthConfig, TripleMeta};

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::geom::{convex_hull_2d, point_in_convex_polygon, Vec3};
use crate::voxel::{load_grid, save_grid, walk_segment, VoxelGrid, Walk};

/// Input to completion: the observed surface voxels of one object and the
/// observed free space, on a shared grid.
#[derive(Debug, Clone)]
pub struct CompletionInput {
    pub partial: VoxelGrid,
    pub free: VoxelGrid,
}

impl CompletionInput {
    pub fn new(partial: VoxelGrid, free: VoxelGrid) -> Result<Self> {
        if !partial.geometry().same_as(free.geometry()) {
            return Err(Error::GeometryMismatch("completion input grids differ".into()));
        }
        if !partial.is_disjoint_from(&free)? {
            return Err(Error::GeometryMismatch(
                "partial and free grids overlap".into(),
            ));
        }
        Ok(CompletionInput { partial, free })
    }
}

/// A completed volume. Constructed only through [`enforce_constraints`],
/// so `partial ⊆ completed` and `completed ∩ free = ∅` hold by
/// construction.
#[derive(Debug, Clone)]
pub struct CompletionResult {
    pub completed: VoxelGrid,
}

/// Project a raw prediction onto the feasible set:
/// `(raw ∪ partial) ∖ free`. Idempotent.
pub fn enforce_constraints(raw: &VoxelGrid, input: &CompletionInput) -> Result<CompletionResult> {
    let completed = raw.union(&input.partial)?.difference(&input.free)?;
    Ok(CompletionResult { completed })
}

/// A shape completer: predicts a full volume from a partial scan. The raw
/// prediction is always routed through [`enforce_constraints`] by
/// [`complete`], so implementations may over-predict freely.
pub trait Completer {
    fn name(&self) -> &'static str;
    fn complete_raw(&self, input: &CompletionInput) -> Result<VoxelGrid>;
}

/// Run a completer and project the result onto the feasible set.
pub fn complete(completer: &dyn Completer, input: &CompletionInput) -> Result<CompletionResult> {
    if input.partial.is_empty() {
        return Err(Error::EmptyPartial);
    }
    let raw = completer.complete_raw(input)?;
    enforce_constraints(&raw, input)
}

/// Identity completer: the completed volume is the partial scan itself.
pub struct NullCompleter;

impl Completer for NullCompleter {
    fn name(&self) -> &'static str {
        "null"
    }

    fn complete_raw(&self, input: &CompletionInput) -> Result<VoxelGrid> {
        Ok(input.partial.clone())
    }
}

/// Extrudes the 2D convex hull of the partial scan's down-projected
/// occupancy between its min and max z extents.
pub struct PrismHullCompleter;

impl Completer for PrismHullCompleter {
    fn name(&self) -> &'static str {
        "prism_hull"
    }

    fn complete_raw(&self, input: &CompletionInput) -> Result<VoxelGrid> {
        let geom = *input.partial.geometry();
        let mut columns = std::collections::BTreeSet::new();
        let mut z_min = usize::MAX;
        let mut z_max = 0usize;
        for idx in input.partial.iter_set() {
            columns.insert((idx[0], idx[1]));
            z_min = z_min.min(idx[2]);
            z_max = z_max.max(idx[2]);
        }
        let centers: Vec<[f64; 2]> = columns
            .iter()
            .map(|&(x, y)| {
                let c = geom.voxel_center([x, y, 0]);
                [c.x, c.y]
            })
            .collect();
        let hull = convex_hull_2d(&centers);
        let mut out = VoxelGrid::new(geom);
        let eps = geom.resolution * 1e-9;
        for y in 0..geom.dims[1] {
            for x in 0..geom.dims[0] {
                let c = geom.voxel_center([x, y, 0]);
                if point_in_convex_polygon([c.x, c.y], &hull, eps) {
                    for z in z_min..=z_max {
                        out.set([x, y, z], true);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Extends each observed surface voxel away from the camera until it hits
/// known free space, leaves the grid, or exhausts the depth budget.
pub struct CameraExtrudeCompleter {
    pub camera: Vec3,
    /// Maximum extension depth in voxels.
    pub max_depth: usize,
}

impl CameraExtrudeCompleter {
    pub fn new(camera: Vec3, max_depth: usize) -> Self {
        CameraExtrudeCompleter { camera, max_depth }
    }
}

impl Completer for CameraExtrudeCompleter {
    fn name(&self) -> &'static str {
        "camera_extrude"
    }

    fn complete_raw(&self, input: &CompletionInput) -> Result<VoxelGrid> {
        let geom = *input.partial.geometry();
        let mut out = input.partial.clone();
        let budget_len = self.max_depth as f64 * geom.resolution;
        for idx in input.partial.iter_set() {
            let start = geom.voxel_center(idx);
            let dir = (start - self.camera).normalized();
            let end = start + dir.scale(budget_len);
            let mut placed = 0usize;
            walk_segment(&geom, start, end, |v, _, _| {
                let l = geom.linear(v);
                if input.free.get_linear(l) {
                    return Walk::Stop;
                }
                out.set_linear(l, true);
                placed += 1;
                if placed > self.max_depth {
                    Walk::Stop
                } else {
                    Walk::Continue
                }
            });
        }
        Ok(out)
    }
}

/// Out-of-process completer: writes `partial.vxg` and `free.vxg` into the
/// exchange directory, then polls for `completed.vxg` (which a watching
/// process is expected to produce) and consumes it.
pub struct ExternalCompleter {
    pub dir: PathBuf,
    pub timeout_seconds: f64,
}

impl ExternalCompleter {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ExternalCompleter { dir: dir.into(), timeout_seconds: 30.0 }
    }

    pub fn input_paths(&self) -> (PathBuf, PathBuf) {
        (self.dir.join("partial.vxg"), self.dir.join("free.vxg"))
    }

    pub fn output_path(&self) -> PathBuf {
        self.dir.join("completed.vxg")
    }
}

impl Completer for ExternalCompleter {
    fn name(&self) -> &'static str {
        "external"
    }

    fn complete_raw(&self, input: &CompletionInput) -> Result<VoxelGrid> {
        std::fs::create_dir_all(&self.dir)?;
        let (partial_path, free_path) = self.input_paths();
        save_grid(&input.partial, &partial_path)?;
        save_grid(&input.free, &free_path)?;
        let out = self.output_path();
        let deadline = std::time::Instant::now()
            + std::time::Duration::from_secs_f64(self.timeout_seconds);
        loop {
            if out.exists() {
                let grid = load_grid(&out)?;
                std::fs::remove_file(&out).ok();
                if !grid.geometry().same_as(input.partial.geometry()) {
                    return Err(Error::GeometryMismatch(
                        "external completer returned a different grid geometry".into(),
                    ));
                }
                return Ok(grid);
            }
            if std::time::Instant::now() >= deadline {
                return Err(Error::ExternalCompleterTimeout {
                    path: out.display().to_string(),
                    seconds: self.timeout_seconds,
                });
            }
            std::thread::sleep(std::time::Duration::from_millis(20));
        }
    }
}

/// Completion feature selector used in planner and experiment configs.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompleterKind {
    Off,
    Null,
    PrismHull,
    CameraExtrude,
    External(PathBuf),
}

impl CompleterKind {
    /// Instantiate the completer, if any. `camera` seeds the
    /// camera-extrude heuristic; `max_depth` bounds its extension.
    pub fn build(&self, camera: Vec3, max_depth: usize) -> Option<Box<dyn Completer>> {
        match self {
            CompleterKind::Off => None,
            CompleterKind::Null => Some(Box::new(NullCompleter)),
            CompleterKind::PrismHull => Some(Box::new(PrismHullCompleter)),
            CompleterKind::CameraExtrude => {
                Some(Box::new(CameraExtrudeCompleter::new(camera, max_depth)))
            }
            CompleterKind::External(dir) => Some(Box::new(ExternalCompleter::new(dir.clone()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Pcg32;
    use crate::voxel::GridGeometry;

    pub(crate) fn random_input(n: usize, rng: &mut Pcg32) -> CompletionInput {
        let geom = GridGeometry::cube(n, 0.01);
        let mut partial = VoxelGrid::new(geom);
        let mut free = VoxelGrid::new(geom);
        for l in 0..geom.len() {
            match rng.below(10) {
                0 => partial.set_linear(l, true),
                1 | 2 => free.set_linear(l, true),
                _ => {}
            }
        }
        let free = free.difference(&partial).unwrap();
        CompletionInput::new(partial, free).unwrap()
    }

    #[test]
    fn enforce_is_projection_and_idempotent() {
        let mut rng = Pcg32::new(21);
        for _ in 0..50 {
            let input = random_input(12, &mut rng);
            let mut raw = VoxelGrid::new(*input.partial.geometry());
            for l in 0..raw.geometry().len() {
                if rng.chance(0.2) {
                    raw.set_linear(l, true);
                }
            }
            let out = enforce_constraints(&raw, &input).unwrap();
            assert!(input.partial.is_subset_of(&out.completed).unwrap());
            assert!(out.completed.is_disjoint_from(&input.free).unwrap());
            // Voxels outside free and inside raw ∪ partial are preserved.
            let expect = raw.union(&input.partial).unwrap().difference(&input.free).unwrap();
            assert_eq!(out.completed, expect);
            // Idempotent.
            let again = enforce_constraints(&out.completed, &input).unwrap();
            assert_eq!(again.completed, out.completed);
        }
    }

    #[test]
    fn enforce_fixed_point_on_partial() {
        let mut rng = Pcg32::new(3);
        let input = random_input(8, &mut rng);
        let out = enforce_constraints(&input.partial, &input).unwrap();
        assert_eq!(out.completed, input.partial);
    }

    #[test]
    fn null_completer_is_identity_on_partial() {
        let mut rng = Pcg32::new(4);
        let input = random_input(8, &mut rng);
        let out = complete(&NullCompleter, &input).unwrap();
        assert_eq!(out.completed, input.partial);
    }

    #[test]
    fn empty_partial_is_an_error() {
        let geom = GridGeometry::cube(4, 0.01);
        let input = CompletionInput::new(VoxelGrid::new(geom), VoxelGrid::new(geom)).unwrap();
        assert!(matches!(complete(&NullCompleter, &input), Err(Error::EmptyPartial)));
    }

    #[test]
    fn prism_hull_recovers_box_from_oblique_faces() {
        // Truth: a 6x6x6 solid box inside a 12^3 grid. Partial: its front
        // (min-y) face plus its top face, which together span the footprint
        // and the z range the way an elevated camera sees a box.
        let geom = GridGeometry::cube(12, 0.01);
        let mut truth = VoxelGrid::new(geom);
        for x in 3..9 {
            for y in 3..9 {
                for z in 0..6 {
                    truth.set([x, y, z], true);
                }
            }
        }
        let mut partial = VoxelGrid::new(geom);
        for x in 3..9 {
            for z in 0..6 {
                partial.set([x, 3, z], true);
            }
            for y in 3..9 {
                partial.set([x, y, 5], true);
            }
        }
        let free = VoxelGrid::new(geom);
        let input = CompletionInput::new(partial.clone(), free).unwrap();
        let out = complete(&PrismHullCompleter, &input).unwrap();
        assert!(truth.is_subset_of(&out.completed).unwrap());
        let d_completed = crate::voxel::grid_distance(&out.completed, &truth).unwrap();
        let d_partial = crate::voxel::grid_distance(&partial, &truth).unwrap();
        assert!(d_completed < d_partial, "{d_completed} vs {d_partial}");
    }

    #[test]
    fn camera_extrude_respects_free_space() {
        // Free space abutting the back face must stay empty.
        let geom = GridGeometry::cube(10, 0.01);
        let mut partial = VoxelGrid::new(geom);
        let mut free = VoxelGrid::new(geom);
        for x in 0..10 {
            for z in 0..10 {
                partial.set([x, 4, z], true);
                free.set([x, 6, z], true); // immediately behind a 1-voxel gap
            }
        }
        let input = CompletionInput::new(partial, free).unwrap();
        let camera = Vec3::new(0.05, -1.0, 0.05);
        let out = complete(&CameraExtrudeCompleter::new(camera, 8), &input).unwrap();
        assert!(out.completed.is_disjoint_from(&input.free).unwrap());
        // It extended into the gap row.
        assert!(out.completed.get([5, 5, 5]));
        assert!(!out.completed.get([5, 6, 5]));
    }

    #[test]
    fn all_builtin_completers_satisfy_constraints() {
        let mut rng = Pcg32::new(777);
        let camera = Vec3::new(0.06, -0.5, 0.06);
        let completers: Vec<Box<dyn Completer>> = vec![
            Box::new(NullCompleter),
            Box::new(PrismHullCompleter),
            Box::new(CameraExtrudeCompleter::new(camera, 6)),
        ];
        for _ in 0..60 {
            let input = random_input(10, &mut rng);
            if input.partial.is_empty() {
                continue;
            }
            for c in &completers {
                let out = complete(c.as_ref(), &input).unwrap();
                assert!(input.partial.is_subset_of(&out.completed).unwrap(), "{}", c.name());
                assert!(out.completed.is_disjoint_from(&input.free).unwrap(), "{}", c.name());
            }
        }
    }

    #[test]
    fn external_completer_consumes_staged_output() {
        let dir = std::env::temp_dir().join("clutterbox_external_test");
        std::fs::create_dir_all(&dir).unwrap();
        let mut rng = Pcg32::new(12);
        let input = random_input(6, &mut rng);
        // Stage the "model output" before invoking, as a fake external
        // process that already ran.
        let staged = input.partial.clone();
        let ext = ExternalCompleter { dir: dir.clone(), timeout_seconds: 2.0 };
        save_grid(&staged, &ext.output_path()).unwrap();
        let out = complete(&ext, &input).unwrap();
        assert!(input.partial.is_subset_of(&out.completed).unwrap());
        // Inputs were written for the external process to read.
        let (p, f) = ext.input_paths();
        assert!(p.exists() && f.exists());
        assert!(!ext.output_path().exists());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn external_completer_times_out() {
        let dir = std::env::temp_dir().join("clutterbox_external_timeout");
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::remove_file(dir.join("completed.vxg")).ok();
        let mut rng = Pcg32::new(13);
        let input = random_input(4, &mut rng);
        let ext = ExternalCompleter { dir: dir.clone(), timeout_seconds: 0.05 };
        assert!(matches!(
            complete(&ext, &input),
            Err(Error::ExternalCompleterTimeout { .. })
        ));
        std::fs::remove_dir_all(&dir).ok();
    }
}
