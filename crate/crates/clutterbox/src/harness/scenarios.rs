//! Procedural scenario library: the showcase scenes (memory / completion)
//! plus sparse- and dense-clutter families. Every scene hides the target
//! ball from the camera at t = 0.

use crate::error::{Error, Result};
use crate::scene::{
    build_scene, CameraToml, ObjectToml, PoseToml, Scene, SceneFile, ShapeToml, TableToml,
    VoxelToml,
};

/// The target ball's color in every library scene; everything else keeps
/// at least the default classifier threshold away from it in RGB.
pub const TARGET_COLOR: [f64; 3] = [0.9, 0.9, 0.1];

fn base_file(name: &str) -> SceneFile {
    SceneFile {
        name: Some(name.to_string()),
        table: TableToml { extent: [1.0, 1.0], height: 0.0, color: [0.5, 0.45, 0.4], floor_drop: 0.3 },
        camera: CameraToml {
            position: [0.0, -0.6, 0.75],
            look_at: [0.0, 0.05, 0.0],
            focal: [110.0, 110.0],
            image: [160, 120],
        },
        voxel: VoxelToml::default(),
        objects: Vec::new(),
    }
}

fn shape(kind: &str) -> ShapeToml {
    ShapeToml { kind: kind.into(), size: None, radius: None, height: None, sides: None, path: None }
}

fn boxy(id: &str, size: [f64; 3], x: f64, y: f64, yaw: f64, color: [f64; 3]) -> ObjectToml {
    let mut s = shape("box");
    s.size = Some(size);
    ObjectToml { id: id.into(), shape: s, pose: PoseToml { x, y, yaw }, color, is_target: false }
}

fn cylinder(id: &str, radius: f64, height: f64, x: f64, y: f64, color: [f64; 3]) -> ObjectToml {
    let mut s = shape("cylinder");
    s.radius = Some(radius);
    s.height = Some(height);
    ObjectToml {
        id: id.into(),
        shape: s,
        pose: PoseToml { x, y, yaw: 0.0 },
        color,
        is_target: false,
    }
}

fn prism(id: &str, sides: u32, radius: f64, height: f64, x: f64, y: f64, color: [f64; 3]) -> ObjectToml {
    let mut s = shape("prism");
    s.sides = Some(sides);
    s.radius = Some(radius);
    s.height = Some(height);
    ObjectToml {
        id: id.into(),
        shape: s,
        pose: PoseToml { x, y, yaw: 0.0 },
        color,
        is_target: false,
    }
}

fn target_ball(x: f64, y: f64) -> ObjectToml {
    let mut s = shape("sphere");
    s.radius = Some(0.03);
    ObjectToml {
        id: "ball".into(),
        shape: s,
        pose: PoseToml { x, y, yaw: 0.0 },
        color: TARGET_COLOR,
        is_target: true,
    }
}

/// Memory showcase: a tall decoy casts a much larger shadow than the
/// small can actually hiding the target.
fn scene_a() -> SceneFile {
    let mut f = base_file("scene_a");
    f.objects = vec![
        cylinder("pitcher", 0.06, 0.26, -0.16, 0.10, [0.2, 0.3, 0.8]),
        cylinder("can", 0.05, 0.15, 0.14, 0.02, [0.8, 0.2, 0.2]),
        boxy("jug", [0.09, 0.07, 0.12], -0.36, -0.12, 0.0, [0.2, 0.7, 0.3]),
        target_ball(0.14, 0.115),
    ];
    f
}

/// Completion showcase: two deep boxes with mostly self-contained shadows
/// distract from the small cylinder hiding the target.
fn scene_b() -> SceneFile {
    let mut f = base_file("scene_b");
    f.objects = vec![
        boxy("box_left", [0.14, 0.20, 0.10], -0.30, 0.40, 0.0, [0.25, 0.3, 0.75]),
        boxy("box_right", [0.14, 0.20, 0.10], 0.30, 0.40, 0.0, [0.75, 0.25, 0.3]),
        cylinder("small_cylinder", 0.04, 0.16, 0.0, 0.10, [0.3, 0.7, 0.7]),
        target_ball(0.0, 0.195),
    ];
    f
}

/// Sparse clutter, 5 objects.
fn scene_c1() -> SceneFile {
    let mut f = base_file("scene_c1");
    f.objects = vec![
        boxy("cereal", [0.12, 0.07, 0.18], 0.02, 0.02, 0.0, [0.8, 0.4, 0.1]),
        cylinder("tumbler", 0.04, 0.11, -0.28, -0.06, [0.2, 0.5, 0.8]),
        boxy("tea", [0.08, 0.06, 0.09], 0.30, -0.10, 0.4, [0.3, 0.7, 0.2]),
        prism("wedge", 3, 0.06, 0.10, -0.24, 0.22, [0.7, 0.2, 0.6]),
        target_ball(0.02, 0.11),
    ];
    f
}

/// Sparse clutter, 6 objects.
fn scene_c2() -> SceneFile {
    let mut f = base_file("scene_c2");
    f.objects = vec![
        cylinder("thermos", 0.05, 0.17, -0.10, 0.04, [0.6, 0.3, 0.2]),
        boxy("crackers", [0.11, 0.07, 0.15], 0.22, 0.00, -0.3, [0.2, 0.4, 0.8]),
        boxy("soap", [0.07, 0.05, 0.08], -0.33, -0.14, 0.0, [0.7, 0.7, 0.7]),
        cylinder("mug", 0.045, 0.09, 0.05, -0.25, [0.8, 0.2, 0.4]),
        prism("door_stop", 4, 0.05, 0.07, 0.36, 0.20, [0.3, 0.6, 0.5]),
        target_ball(-0.10, 0.125),
    ];
    f
}

/// Sparse clutter, 8 objects.
fn scene_c3() -> SceneFile {
    let mut f = base_file("scene_c3");
    f.objects = vec![
        boxy("carton", [0.10, 0.08, 0.17], 0.08, 0.05, 0.2, [0.8, 0.3, 0.2]),
        cylinder("jar", 0.045, 0.12, -0.20, -0.02, [0.3, 0.3, 0.7]),
        boxy("deck", [0.07, 0.05, 0.06], 0.33, -0.08, 0.0, [0.2, 0.7, 0.6]),
        cylinder("spray", 0.035, 0.19, -0.36, 0.12, [0.7, 0.3, 0.5]),
        prism("prism6", 6, 0.05, 0.10, 0.27, 0.21, [0.5, 0.6, 0.2]),
        boxy("sponge", [0.08, 0.05, 0.04], -0.05, -0.28, 0.7, [0.25, 0.55, 0.35]),
        cylinder("cup", 0.04, 0.08, 0.18, -0.27, [0.45, 0.3, 0.65]),
        target_ball(0.08, 0.15),
    ];
    f
}

/// Dense clutter, 9 objects: a touching two-layer pack, target behind a rear box.
fn scene_d1() -> SceneFile {
    let mut f = base_file("scene_d1");
    f.objects = vec![
        boxy("front_a", [0.10, 0.08, 0.15], -0.10, -0.02, 0.0, [0.25, 0.35, 0.8]),
        boxy("front_b", [0.10, 0.08, 0.15], 0.0, -0.02, 0.0, [0.8, 0.3, 0.25]),
        boxy("front_c", [0.10, 0.08, 0.15], 0.10, -0.02, 0.0, [0.3, 0.7, 0.3]),
        boxy("cap_left", [0.08, 0.08, 0.12], -0.19, -0.02, 0.0, [0.5, 0.5, 0.4]),
        boxy("cap_right", [0.08, 0.08, 0.12], 0.19, -0.02, 0.0, [0.55, 0.3, 0.6]),
        boxy("rear_a", [0.10, 0.08, 0.13], -0.05, 0.06, 0.0, [0.3, 0.55, 0.55]),
        boxy("rear_b", [0.10, 0.08, 0.13], 0.05, 0.06, 0.0, [0.6, 0.45, 0.3]),
        cylinder("post", 0.05, 0.12, 0.0, 0.145, [0.5, 0.3, 0.65]),
        target_ball(-0.05, 0.133),
    ];
    f
}

/// Dense clutter, 9 objects in a packed two-row block.
fn scene_d2() -> SceneFile {
    let mut f = base_file("scene_d2");
    f.objects = vec![
        boxy("front_a", [0.10, 0.08, 0.13], -0.15, -0.02, 0.0, [0.3, 0.4, 0.75]),
        boxy("front_b", [0.10, 0.08, 0.13], -0.05, -0.02, 0.0, [0.75, 0.35, 0.3]),
        boxy("front_c", [0.10, 0.08, 0.13], 0.05, -0.02, 0.0, [0.35, 0.7, 0.3]),
        boxy("front_d", [0.10, 0.08, 0.13], 0.15, -0.02, 0.0, [0.6, 0.45, 0.3]),
        boxy("mid_a", [0.10, 0.08, 0.15], -0.10, 0.06, 0.0, [0.5, 0.3, 0.65]),
        boxy("mid_b", [0.10, 0.08, 0.15], 0.10, 0.06, 0.0, [0.25, 0.6, 0.6]),
        prism("corner", 4, 0.055, 0.09, 0.205, 0.06, [0.45, 0.65, 0.3]),
        prism("wedge_left", 3, 0.055, 0.09, -0.20, 0.06, [0.3, 0.55, 0.5]),
        target_ball(-0.10, 0.133),
    ];
    f
}

/// Dense clutter, 8 objects in one tight cluster.
fn scene_d3() -> SceneFile {
    let mut f = base_file("scene_d3");
    f.objects = vec![
        boxy("block_a", [0.11, 0.09, 0.14], -0.055, 0.0, 0.0, [0.3, 0.45, 0.75]),
        boxy("block_b", [0.11, 0.09, 0.14], 0.055, 0.0, 0.0, [0.75, 0.4, 0.3]),
        cylinder("tower", 0.05, 0.16, -0.105, 0.095, [0.35, 0.65, 0.35]),
        boxy("ledge", [0.09, 0.07, 0.12], 0.105, 0.08, 0.0, [0.55, 0.5, 0.35]),
        cylinder("stub", 0.04, 0.09, 0.0, 0.085, [0.55, 0.35, 0.6]),
        boxy("side_a", [0.08, 0.06, 0.10], -0.195, 0.095, 0.0, [0.25, 0.55, 0.35]),
        boxy("side_b", [0.08, 0.06, 0.10], 0.19, 0.08, 0.0, [0.45, 0.3, 0.65]),
        target_ball(0.105, 0.148),
    ];
    f
}

pub fn scenario_names() -> Vec<&'static str> {
    vec!["scene_a", "scene_b", "scene_c1", "scene_c2", "scene_c3", "scene_d1", "scene_d2", "scene_d3"]
}

pub fn scenario_file(name: &str) -> Result<SceneFile> {
    match name {
        "scene_a" => Ok(scene_a()),
        "scene_b" => Ok(scene_b()),
        "scene_c1" => Ok(scene_c1()),
        "scene_c2" => Ok(scene_c2()),
        "scene_c3" => Ok(scene_c3()),
        "scene_d1" => Ok(scene_d1()),
        "scene_d2" => Ok(scene_d2()),
        "scene_d3" => Ok(scene_d3()),
        other => Err(Error::Parse {
            file: other.to_string(),
            message: "unknown scenario name".into(),
        }),
    }
}

pub fn scenario(name: &str) -> Result<Scene> {
    build_scene(&scenario_file(name)?, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occlusion::compute_occlusions;
    use crate::scene::{build_occupancy, detect_target, render_observation, TargetClassifier};

    fn shadow_count_for(scene: &Scene, object_index: usize) -> usize {
        let obs = render_observation(scene);
        let geom = scene.workspace_geometry();
        let field = build_occupancy(&obs, &scene.camera, geom, 0.5);
        let shadows = compute_occlusions(&field, &scene.camera);
        let mut count = 0;
        for &(_, blocker) in &shadows.entries {
            let p = geom.voxel_center(geom.unlinear(blocker));
            if scene.objects[object_index].contains_world(p) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn every_scenario_builds_and_hides_the_target() {
        for name in scenario_names() {
            let scene = scenario(name).unwrap();
            scene.validate().unwrap();
            let obs = render_observation(&scene);
            let target = scene.target as u16;
            let visible = obs
                .labels
                .iter()
                .any(|l| *l == crate::scene::PixelLabel::Object(target));
            assert!(!visible, "{name}: target visible at t=0");
            // Color classifier finds nothing at t=0 either.
            let classifier = TargetClassifier::new(TARGET_COLOR, 0.5);
            assert!(
                detect_target(&obs, &classifier).iter().all(|m| !m),
                "{name}: classifier fires at t=0"
            );
        }
    }

    #[test]
    fn emitted_scenarios_parse_back() {
        for name in scenario_names() {
            let file = scenario_file(name).unwrap();
            let text = crate::scene::scene_to_toml(&file);
            let scene = crate::scene::parse_scene(&text, name).unwrap();
            assert_eq!(scene.objects.len(), file.objects.len(), "{name}");
        }
    }

    #[test]
    fn non_target_colors_stay_outside_the_classifier_threshold() {
        for name in scenario_names() {
            let scene = scenario(name).unwrap();
            for (i, o) in scene.objects.iter().enumerate() {
                if i == scene.target {
                    continue;
                }
                let d: f64 = (0..3)
                    .map(|k| (o.color[k] - TARGET_COLOR[k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(d >= 0.5, "{name}: object {} color too close to target", o.id);
            }
        }
    }

    #[test]
    fn scene_a_decoy_outshadows_the_occluder() {
        let scene = scenario("scene_a").unwrap();
        let pitcher = scene.object_index("pitcher").unwrap();
        let can = scene.object_index("can").unwrap();
        let decoy = shadow_count_for(&scene, pitcher);
        let occluder = shadow_count_for(&scene, can);
        assert!(
            decoy > occluder,
            "pitcher shadow {decoy} should exceed can shadow {occluder}"
        );
    }

    #[test]
    fn scene_b_box_shadows_are_mostly_self_volume() {
        let scene = scenario("scene_b").unwrap();
        let obs = render_observation(&scene);
        let geom = scene.workspace_geometry();
        let field = build_occupancy(&obs, &scene.camera, geom, 0.5);
        let shadows = compute_occlusions(&field, &scene.camera);
        for id in ["box_left", "box_right"] {
            let bi = scene.object_index(id).unwrap();
            let mut total = 0usize;
            let mut inside = 0usize;
            for &(shadow, blocker) in &shadows.entries {
                let bp = geom.voxel_center(geom.unlinear(blocker));
                if !scene.objects[bi].contains_world(bp) {
                    continue;
                }
                total += 1;
                let sp = geom.voxel_center(geom.unlinear(shadow));
                if scene.objects[bi].contains_world(sp) {
                    inside += 1;
                }
            }
            assert!(total > 0, "{id} casts no shadow");
            let frac = inside as f64 / total as f64;
            assert!(frac >= 0.6, "{id}: only {frac:.2} of shadow inside its volume");
        }
    }

    #[test]
    fn dense_scenes_form_contact_graphs() {
        for name in ["scene_d1", "scene_d2", "scene_d3"] {
            let scene = scenario(name).unwrap();
            let res = scene.voxel.resolution;
            let touch_threshold = res * 1.5;
            let footprints: Vec<Vec<[f64; 2]>> = (0..scene.objects.len())
                .map(|i| {
                    let o = &scene.objects[i];
                    o.footprint_cells()
                        .iter()
                        .map(|c| {
                            let w = o.pose.apply(crate::geom::Vec3::new(c[0], c[1], 0.0));
                            [w.x, w.y]
                        })
                        .collect()
                })
                .collect();
            for i in 0..scene.objects.len() {
                let mut touches = false;
                'outer: for j in 0..scene.objects.len() {
                    if i == j {
                        continue;
                    }
                    for p in &footprints[i] {
                        for q in &footprints[j] {
                            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                            if d <= touch_threshold {
                                touches = true;
                                break 'outer;
                            }
                        }
                    }
                }
                assert!(touches, "{name}: object {} touches nothing", scene.objects[i].id);
            }
        }
    }
}
