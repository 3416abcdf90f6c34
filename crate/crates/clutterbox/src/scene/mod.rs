//! Ground-truth simulated world: table, camera, voxelized rigid objects,
//! depth rendering, ground-truth segmentation, target detection, and
//! observation-to-occupancy carving.

mod file;
mod render;
mod segment;

pub use file::{
    build_scene, parse_scene, scene_to_toml, CameraToml, ObjectToml, PoseToml, SceneFile,
    ShapeToml, TableToml, VoxelToml,
};
pub use render::{build_occupancy, carve_labeled, rasterize, render_observation, WorldRaster};
pub use segment::{detect_target, segment, SegmentMask, SegmentationNoiseModel};

use crate::error::{Error, Result};
use crate::geom::{RigidTransform, Vec3};
use crate::rng::fnv1a;
use crate::voxel::{GridGeometry, VoxelGrid};

/// Axis-aligned table: full (x, y) extent centered on the world origin,
/// surface at z = `height`. The room floor sits `floor_drop` below the
/// surface; rays that miss the table return floor depth, so the sensor
/// observes the free space around and beyond the table edges.
#[derive(Debug, Clone, Copy)]
pub struct Table {
    pub extent: [f64; 2],
    pub height: f64,
    pub floor_drop: f64,
}

impl Table {
    pub fn floor_z(&self) -> f64 {
        self.height - self.floor_drop
    }
}

impl Table {
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.extent[0] * 0.5 && y.abs() <= self.extent[1] * 0.5
    }
}

/// Pinhole camera with a z-up look-at pose. Image x runs along `right`,
/// image y along `down`, and the optical axis along `forward`.
#[derive(Debug, Clone)]
pub struct Camera {
    pub position: Vec3,
    pub right: Vec3,
    pub down: Vec3,
    pub forward: Vec3,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn look_at(
        position: Vec3,
        target: Vec3,
        focal: [f64; 2],
        image: [usize; 2],
    ) -> Camera {
        let forward = (target - position).normalized();
        let up = Vec3::new(0.0, 0.0, 1.0);
        let right = forward.cross(up).normalized();
        let down = forward.cross(right).normalized();
        Camera {
            position,
            right,
            down,
            forward,
            fx: focal[0],
            fy: focal[1],
            cx: image[0] as f64 * 0.5,
            cy: image[1] as f64 * 0.5,
            width: image[0],
            height: image[1],
        }
    }

    /// Unit direction through the center of pixel (px, py).
    pub fn pixel_ray(&self, px: usize, py: usize) -> Vec3 {
        let dx = (px as f64 + 0.5 - self.cx) / self.fx;
        let dy = (py as f64 + 0.5 - self.cy) / self.fy;
        (self.right.scale(dx) + self.down.scale(dy) + self.forward).normalized()
    }

    /// Image coordinates of a world point, if it projects inside the image
    /// with positive forward depth.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let v = p - self.position;
        let zc = v.dot(self.forward);
        if zc <= 0.0 {
            return None;
        }
        let px = self.fx * v.dot(self.right) / zc + self.cx;
        let py = self.fy * v.dot(self.down) / zc + self.cy;
        if px >= 0.0 && px < self.width as f64 && py >= 0.0 && py < self.height as f64 {
            Some((px, py))
        } else {
            None
        }
    }

    pub fn in_frustum(&self, p: Vec3) -> bool {
        self.project(p).is_some()
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

/// One rigid object: a binary shape grid in its canonical frame (bottom at
/// z = 0, x/y centered), a world pose, and a display color.
#[derive(Debug, Clone)]
pub struct ObjectModel {
    pub id: String,
    pub shape: VoxelGrid,
    pub pose: RigidTransform,
    pub color: [f64; 3],
    /// Removed from the table by ejection or final retrieval.
    pub ejected: bool,
    centroid_local: Vec3,
}

impl ObjectModel {
    pub fn new(id: impl Into<String>, shape: VoxelGrid, pose: RigidTransform, color: [f64; 3]) -> Self {
        assert!(!shape.is_empty(), "object shape must contain voxels");
        let pts = shape.sparse_points();
        let mut c = Vec3::ZERO;
        for p in pts.iter() {
            c = c + *p;
        }
        let centroid_local = c.scale(1.0 / pts.len() as f64);
        ObjectModel {
            id: id.into(),
            shape,
            pose,
            color,
            ejected: false,
            centroid_local,
        }
    }

    /// World-space centroid of the ground-truth voxel volume.
    pub fn centroid_world(&self) -> Vec3 {
        self.pose.apply(self.centroid_local)
    }

    pub fn centroid_local(&self) -> Vec3 {
        self.centroid_local
    }

    /// Down-projected set of occupied (x, y) cell centers in the object
    /// frame, one entry per column that contains at least one voxel.
    pub fn footprint_cells(&self) -> Vec<[f64; 2]> {
        let geom = self.shape.geometry();
        let mut columns = std::collections::BTreeSet::new();
        for idx in self.shape.iter_set() {
            columns.insert((idx[0], idx[1]));
        }
        columns
            .into_iter()
            .map(|(x, y)| {
                let c = geom.voxel_center([x, y, 0]);
                [c.x, c.y]
            })
            .collect()
    }

    /// True if the world point's column is inside this object's footprint.
    pub fn footprint_contains_world(&self, x: f64, y: f64) -> bool {
        let local = self.pose.inverse().apply(Vec3::new(x, y, self.pose.trans.z));
        let geom = self.shape.geometry();
        let fx = (local.x - geom.origin.x) / geom.resolution;
        let fy = (local.y - geom.origin.y) / geom.resolution;
        if fx < 0.0 || fy < 0.0 {
            return false;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        if ix >= geom.dims[0] || iy >= geom.dims[1] {
            return false;
        }
        (0..geom.dims[2]).any(|z| self.shape.get([ix, iy, z]))
    }

    /// True if the world point lies inside the object's voxel volume.
    pub fn contains_world(&self, p: Vec3) -> bool {
        let local = self.pose.inverse().apply(p);
        match self.shape.geometry().world_to_voxel(local) {
            Some(idx) => self.shape.get(idx),
            None => false,
        }
    }
}

/// Workspace voxelization parameters: grid resolution, margin beyond the
/// table extent, and workspace height above the table surface.
#[derive(Debug, Clone, Copy)]
pub struct VoxelParams {
    pub resolution: f64,
    pub margin: f64,
    pub height: f64,
}

impl Default for VoxelParams {
    fn default() -> Self {
        VoxelParams { resolution: 0.01, margin: 0.05, height: 0.4 }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    pub table: Table,
    pub camera: Camera,
    pub objects: Vec<ObjectModel>,
    pub target: usize,
    pub voxel: VoxelParams,
    pub table_color: [f64; 3],
}

impl Scene {
    /// Workspace grid: table extent plus margin, one voxel layer of table
    /// material below the surface (z index 0), `height` meters above it.
    pub fn workspace_geometry(&self) -> GridGeometry {
        let res = self.voxel.resolution;
        let half_x = self.table.extent[0] * 0.5 + self.voxel.margin;
        let half_y = self.table.extent[1] * 0.5 + self.voxel.margin;
        let nx = (2.0 * half_x / res).ceil() as usize;
        let ny = (2.0 * half_y / res).ceil() as usize;
        let nz = 1 + (self.voxel.height / res).ceil() as usize;
        GridGeometry::new(
            [nx, ny, nz],
            res,
            Vec3::new(-half_x, -half_y, self.table.height - res),
        )
    }

    pub fn target_object(&self) -> &ObjectModel {
        &self.objects[self.target]
    }

    /// Objects still on the table.
    pub fn active_objects(&self) -> impl Iterator<Item = (usize, &ObjectModel)> {
        self.objects.iter().enumerate().filter(|(_, o)| !o.ejected)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for o in &self.objects {
            if !seen.insert(o.id.as_str()) {
                return Err(Error::InvalidScene(format!("duplicate object id `{}`", o.id)));
            }
            if o.shape.is_empty() {
                return Err(Error::InvalidScene(format!("object `{}` has an empty shape", o.id)));
            }
        }
        if self.target >= self.objects.len() {
            return Err(Error::InvalidScene("target index out of range".into()));
        }
        let geom = self.workspace_geometry();
        let center = geom.voxel_center([geom.dims[0] / 2, geom.dims[1] / 2, geom.dims[2] / 2]);
        let cam = &self.camera;
        let inside = cam.position.x >= geom.origin.x
            && cam.position.x < geom.max_corner().x
            && cam.position.y >= geom.origin.y
            && cam.position.y < geom.max_corner().y
            && cam.position.z >= geom.origin.z
            && cam.position.z < geom.max_corner().z;
        if inside {
            return Err(Error::InvalidScene("camera must sit outside the workspace".into()));
        }
        if cam.forward.dot(center - cam.position) <= 0.0 {
            return Err(Error::InvalidScene("camera does not look at the workspace".into()));
        }
        Ok(())
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }
}

/// Per-pixel ground-truth hit class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelLabel {
    Background,
    Table,
    Object(u16),
}

#[derive(Debug, Clone)]
pub struct Observation {
    pub width: usize,
    pub height: usize,
    /// Euclidean distance from the camera to the first surface along each
    /// pixel ray; 0.0 means no return.
    pub depth: Vec<f64>,
    pub color: Vec<[f64; 3]>,
    pub labels: Vec<PixelLabel>,
}

impl Observation {
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Stable 64-bit digest over depth, color, and labels.
    pub fn digest(&self) -> u64 {
        let mut bytes = Vec::with_capacity(self.pixel_count() * 14);
        for d in &self.depth {
            bytes.extend_from_slice(&d.to_bits().to_le_bytes());
        }
        for c in &self.color {
            for ch in c {
                bytes.extend_from_slice(&ch.to_bits().to_le_bytes());
            }
        }
        for l in &self.labels {
            match l {
                PixelLabel::Background => bytes.push(0),
                PixelLabel::Table => bytes.push(1),
                PixelLabel::Object(i) => {
                    bytes.push(2);
                    bytes.extend_from_slice(&i.to_le_bytes());
                }
            }
        }
        fnv1a(&[&bytes])
    }
}

/// Color-matching target classifier: a pixel belongs to the target when
/// its RGB Euclidean distance to the reference color is below the
/// threshold.
#[derive(Debug, Clone)]
pub struct TargetClassifier {
    pub reference: [f64; 3],
    pub tau_target: f64,
}

impl TargetClassifier {
    pub fn new(reference: [f64; 3], tau_target: f64) -> Self {
        assert!(tau_target > 0.0 && tau_target <= 1.0, "tau_target must be in (0, 1]");
        TargetClassifier { reference, tau_target }
    }

    pub fn matches(&self, color: [f64; 3]) -> bool {
        let d2: f64 = (0..3).map(|i| (color[i] - self.reference[i]).powi(2)).sum();
        d2.sqrt() < self.tau_target
    }
}

/// Voxel label codes over the workspace grid: 0 = unlabeled, 1 = table,
/// 2 + k = planning segment k of the current step.
#[derive(Debug, Clone)]
pub struct VoxelLabels {
    geom: GridGeometry,
    codes: Vec<u16>,
}

pub const LABEL_NONE: u16 = 0;
pub const LABEL_TABLE: u16 = 1;

pub fn segment_label(segment: usize) -> u16 {
    2 + segment as u16
}

pub fn label_to_segment(code: u16) -> Option<usize> {
    if code >= 2 {
        Some(code as usize - 2)
    } else {
        None
    }
}

impl VoxelLabels {
    pub fn new(geom: GridGeometry) -> Self {
        VoxelLabels { geom, codes: vec![LABEL_NONE; geom.len()] }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn code_linear(&self, l: usize) -> u16 {
        self.codes[l]
    }

    pub fn code(&self, idx: [usize; 3]) -> u16 {
        self.codes[self.geom.linear(idx)]
    }

    pub fn set_linear(&mut self, l: usize, code: u16) {
        self.codes[l] = code;
    }

    /// Binary grid of every voxel carrying the given code.
    pub fn grid_for(&self, code: u16) -> VoxelGrid {
        let mut g = VoxelGrid::new(self.geom);
        for (l, &c) in self.codes.iter().enumerate() {
            if c == code {
                g.set_linear(l, true);
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::{voxelize_primitive, PrimitiveSpec};

    pub(crate) fn simple_box(id: &str, size: [f64; 3], x: f64, y: f64, color: [f64; 3]) -> ObjectModel {
        let shape = voxelize_primitive(&PrimitiveSpec::Box { size }, 0.01).unwrap();
        ObjectModel::new(id, shape, RigidTransform::planar(x, y, 0.0, 0.0), color)
    }

    #[test]
    fn camera_projection_roundtrip() {
        let cam = Camera::look_at(
            Vec3::new(0.0, -0.75, 0.65),
            Vec3::new(0.0, 0.05, 0.0),
            [110.0, 110.0],
            [160, 120],
        );
        // A point straight down the optical axis projects to the center.
        let p = cam.position + cam.forward.scale(0.8);
        let (px, py) = cam.project(p).unwrap();
        assert!((px - 80.0).abs() < 1e-9 && (py - 60.0).abs() < 1e-9);

        // pixel_ray and project are inverse.
        let dir = cam.pixel_ray(40, 90);
        let q = cam.position + dir.scale(1.3);
        let (qx, qy) = cam.project(q).unwrap();
        assert!((qx - 40.5).abs() < 1e-6 && (qy - 90.5).abs() < 1e-6);
    }

    #[test]
    fn behind_camera_is_not_in_frustum() {
        let cam = Camera::look_at(
            Vec3::new(0.0, -0.75, 0.65),
            Vec3::new(0.0, 0.05, 0.0),
            [110.0, 110.0],
            [160, 120],
        );
        assert!(!cam.in_frustum(cam.position - cam.forward.scale(1.0)));
    }

    #[test]
    fn workspace_geometry_covers_table_plus_margin() {
        let scene = Scene {
            name: "t".into(),
            table: Table { extent: [1.0, 1.0], height: 0.0, floor_drop: 0.3 },
            camera: Camera::look_at(
                Vec3::new(0.0, -0.75, 0.65),
                Vec3::new(0.0, 0.05, 0.0),
                [110.0, 110.0],
                [160, 120],
            ),
            objects: vec![simple_box("a", [0.1, 0.1, 0.1], 0.0, 0.0, [1.0, 0.0, 0.0])],
            target: 0,
            voxel: VoxelParams::default(),
            table_color: [0.5, 0.45, 0.4],
        };
        let g = scene.workspace_geometry();
        assert_eq!(g.dims, [110, 110, 41]);
        assert_eq!(g.origin.z, -0.01);
        scene.validate().unwrap();
    }

    #[test]
    fn validate_catches_duplicate_ids() {
        let mut scene = Scene {
            name: "t".into(),
            table: Table { extent: [1.0, 1.0], height: 0.0, floor_drop: 0.3 },
            camera: Camera::look_at(
                Vec3::new(0.0, -0.75, 0.65),
                Vec3::new(0.0, 0.05, 0.0),
                [110.0, 110.0],
                [160, 120],
            ),
            objects: vec![
                simple_box("a", [0.1, 0.1, 0.1], -0.1, 0.0, [1.0, 0.0, 0.0]),
                simple_box("a", [0.1, 0.1, 0.1], 0.15, 0.0, [0.0, 1.0, 0.0]),
            ],
            target: 0,
            voxel: VoxelParams::default(),
            table_color: [0.5, 0.45, 0.4],
        };
        assert!(scene.validate().is_err());
        scene.objects[1].id = "b".into();
        scene.validate().unwrap();
    }

    #[test]
    fn classifier_threshold_behavior() {
        let c = TargetClassifier::new([0.9, 0.9, 0.1], 0.5);
        assert!(c.matches([0.9, 0.9, 0.1]));
        assert!(!c.matches([0.2, 0.2, 0.9]));
    }
}
