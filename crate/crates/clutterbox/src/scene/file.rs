//! Human-readable scene file format (TOML).
//!
//! Units are meters and radians throughout. Unknown fields are rejected.
//!
//! ```toml
//! name = "demo"
//!
//! [table]
//! extent = [1.0, 1.0]     # full x/y extent, centered on the origin
//! height = 0.0            # z of the table surface
//! color = [0.5, 0.45, 0.4]
//!
//! [camera]
//! position = [0.0, -0.75, 0.65]
//! look_at = [0.0, 0.05, 0.0]
//! focal = [110.0, 110.0]  # fx, fy in pixels
//! image = [160, 120]      # width, height
//!
//! [voxel]
//! resolution = 0.01
//! margin = 0.05           # workspace margin beyond the table extent
//! height = 0.4            # workspace height above the table
//!
//! [[object]]
//! id = "crate"
//! shape = { kind = "box", size = [0.15, 0.1, 0.18] }
//! pose = { x = 0.1, y = 0.2, yaw = 0.0 }
//! color = [0.9, 0.2, 0.1]
//! is_target = false
//! ```
//!
//! Shape kinds: `box {size}`, `cylinder {radius, height}`,
//! `sphere {radius}`, `prism {sides, radius, height}` (regular n-gon
//! cross-section), `grid {path}` (a `.vxg` binary grid file).

use serde::{Deserialize, Serialize};

use super::{Camera, ObjectModel, Scene, Table, VoxelParams};
use crate::completion::{voxelize_primitive, PrimitiveSpec};
use crate::error::{Error, Result};
use crate::geom::{RigidTransform, Vec3};
use crate::voxel::load_grid;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default)]
    pub name: Option<String>,
    pub table: TableToml,
    pub camera: CameraToml,
    #[serde(default)]
    pub voxel: VoxelToml,
    #[serde(rename = "object")]
    pub objects: Vec<ObjectToml>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableToml {
    pub extent: [f64; 2],
    pub height: f64,
    #[serde(default = "default_table_color")]
    pub color: [f64; 3],
    /// Room floor distance below the table surface.
    #[serde(default = "default_floor_drop")]
    pub floor_drop: f64,
}

fn default_floor_drop() -> f64 {
    0.3
}

fn default_table_color() -> [f64; 3] {
    [0.5, 0.45, 0.4]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraToml {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    pub focal: [f64; 2],
    pub image: [usize; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoxelToml {
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_height")]
    pub height: f64,
}

fn default_resolution() -> f64 {
    0.01
}
fn default_margin() -> f64 {
    0.05
}
fn default_height() -> f64 {
    0.4
}

impl Default for VoxelToml {
    fn default() -> Self {
        VoxelToml {
            resolution: default_resolution(),
            margin: default_margin(),
            height: default_height(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectToml {
    pub id: String,
    pub shape: ShapeToml,
    pub pose: PoseToml,
    pub color: [f64; 3],
    #[serde(default)]
    pub is_target: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseToml {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yaw: f64,
}

/// Shape entry. Exactly the fields of one kind may be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeToml {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sides: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl ShapeToml {
    pub fn from_primitive(spec: &PrimitiveSpec) -> ShapeToml {
        let mut s = ShapeToml {
            kind: String::new(),
            size: None,
            radius: None,
            height: None,
            sides: None,
            path: None,
        };
        match *spec {
            PrimitiveSpec::Box { size } => {
                s.kind = "box".into();
                s.size = Some(size);
            }
            PrimitiveSpec::Cylinder { radius, height } => {
                s.kind = "cylinder".into();
                s.radius = Some(radius);
                s.height = Some(height);
            }
            PrimitiveSpec::Sphere { radius } => {
                s.kind = "sphere".into();
                s.radius = Some(radius);
            }
            PrimitiveSpec::Prism { sides, radius, height } => {
                s.kind = "prism".into();
                s.sides = Some(sides);
                s.radius = Some(radius);
                s.height = Some(height);
            }
        }
        s
    }

    fn reject_extra(&self, file: &str, allowed: &[&str]) -> Result<()> {
        let check = |name: &str, present: bool| -> Result<()> {
            if present && !allowed.contains(&name) {
                Err(Error::Parse {
                    file: file.into(),
                    message: format!("field `{name}` is not valid for shape kind `{}`", self.kind),
                })
            } else {
                Ok(())
            }
        };
        check("size", self.size.is_some())?;
        check("radius", self.radius.is_some())?;
        check("height", self.height.is_some())?;
        check("sides", self.sides.is_some())?;
        check("path", self.path.is_some())?;
        Ok(())
    }

    fn build(&self, file: &str, resolution: f64) -> Result<crate::voxel::VoxelGrid> {
        let missing = |name: &str| Error::Parse {
            file: file.into(),
            message: format!("shape kind `{}` requires field `{name}`", self.kind),
        };
        match self.kind.as_str() {
            "box" => {
                self.reject_extra(file, &["size"])?;
                let size = self.size.ok_or_else(|| missing("size"))?;
                voxelize_primitive(&PrimitiveSpec::Box { size }, resolution)
            }
            "cylinder" => {
                self.reject_extra(file, &["radius", "height"])?;
                let radius = self.radius.ok_or_else(|| missing("radius"))?;
                let height = self.height.ok_or_else(|| missing("height"))?;
                voxelize_primitive(&PrimitiveSpec::Cylinder { radius, height }, resolution)
            }
            "sphere" => {
                self.reject_extra(file, &["radius"])?;
                let radius = self.radius.ok_or_else(|| missing("radius"))?;
                voxelize_primitive(&PrimitiveSpec::Sphere { radius }, resolution)
            }
            "prism" => {
                self.reject_extra(file, &["sides", "radius", "height"])?;
                let sides = self.sides.ok_or_else(|| missing("sides"))?;
                let radius = self.radius.ok_or_else(|| missing("radius"))?;
                let height = self.height.ok_or_else(|| missing("height"))?;
                voxelize_primitive(&PrimitiveSpec::Prism { sides, radius, height }, resolution)
            }
            "grid" => {
                self.reject_extra(file, &["path"])?;
                let path = self.path.as_ref().ok_or_else(|| missing("path"))?;
                load_grid(std::path::Path::new(path))
            }
            other => Err(Error::Parse {
                file: file.into(),
                message: format!("unknown shape kind `{other}`"),
            }),
        }
    }
}

/// Parse a scene from TOML text. `source` names the file in errors.
pub fn parse_scene(text: &str, source: &str) -> Result<Scene> {
    let file: SceneFile = toml::from_str(text).map_err(|e| Error::Parse {
        file: source.into(),
        message: e.to_string(),
    })?;
    build_scene(&file, source)
}

pub fn build_scene(file: &SceneFile, source: &str) -> Result<Scene> {
    let table = Table {
        extent: file.table.extent,
        height: file.table.height,
        floor_drop: file.table.floor_drop,
    };
    let camera = Camera::look_at(
        Vec3::new(file.camera.position[0], file.camera.position[1], file.camera.position[2]),
        Vec3::new(file.camera.look_at[0], file.camera.look_at[1], file.camera.look_at[2]),
        file.camera.focal,
        file.camera.image,
    );
    let voxel = VoxelParams {
        resolution: file.voxel.resolution,
        margin: file.voxel.margin,
        height: file.voxel.height,
    };
    let mut objects = Vec::with_capacity(file.objects.len());
    let mut target = None;
    for (i, o) in file.objects.iter().enumerate() {
        let shape = o.shape.build(source, voxel.resolution)?;
        let pose = RigidTransform::planar(o.pose.x, o.pose.y, table.height, o.pose.yaw);
        objects.push(ObjectModel::new(o.id.clone(), shape, pose, o.color));
        if o.is_target {
            if target.is_some() {
                return Err(Error::Parse {
                    file: source.into(),
                    message: "more than one object marked is_target".into(),
                });
            }
            target = Some(i);
        }
    }
    let target = target.ok_or_else(|| Error::Parse {
        file: source.into(),
        message: "no object marked is_target".into(),
    })?;
    let scene = Scene {
        name: file.name.clone().unwrap_or_else(|| "scene".into()),
        table,
        camera,
        objects,
        target,
        voxel,
        table_color: file.table.color,
    };
    scene.validate()?;
    Ok(scene)
}

pub fn scene_to_toml(file: &SceneFile) -> String {
    toml::to_string_pretty(file).expect("scene file serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
name = "demo"

[table]
extent = [1.0, 1.0]
height = 0.0

[camera]
position = [0.0, -0.75, 0.65]
look_at = [0.0, 0.05, 0.0]
focal = [110.0, 110.0]
image = [160, 120]

[[object]]
id = "crate"
shape = { kind = "box", size = [0.15, 0.1, 0.18] }
pose = { x = 0.1, y = 0.2, yaw = 0.0 }
color = [0.9, 0.2, 0.1]

[[object]]
id = "ball"
shape = { kind = "sphere", radius = 0.035 }
pose = { x = 0.1, y = 0.3 }
color = [0.9, 0.9, 0.1]
is_target = true
"#;

    #[test]
    fn parses_demo_scene() {
        let scene = parse_scene(DEMO, "demo.toml").unwrap();
        assert_eq!(scene.name, "demo");
        assert_eq!(scene.objects.len(), 2);
        assert_eq!(scene.target, 1);
        assert_eq!(scene.objects[0].id, "crate");
        assert!(!scene.objects[0].shape.is_empty());
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = DEMO.replace("height = 0.0", "height = 0.0\nwobble = 3");
        let err = parse_scene(&bad, "demo.toml").unwrap_err();
        assert!(err.to_string().contains("demo.toml"), "{err}");
    }

    #[test]
    fn rejects_wrong_shape_fields() {
        let bad = DEMO.replace(
            "shape = { kind = \"sphere\", radius = 0.035 }",
            "shape = { kind = \"sphere\", radius = 0.035, height = 0.1 }",
        );
        let err = parse_scene(&bad, "demo.toml").unwrap_err();
        assert!(err.to_string().contains("not valid for shape kind"), "{err}");
    }

    #[test]
    fn requires_exactly_one_target() {
        let none = DEMO.replace("is_target = true\n", "");
        assert!(parse_scene(&none, "t").is_err());
        let two = DEMO.replace("color = [0.9, 0.2, 0.1]", "color = [0.9, 0.2, 0.1]\nis_target = true");
        assert!(parse_scene(&two, "t").is_err());
    }
}
