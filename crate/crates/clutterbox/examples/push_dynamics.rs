//! Quasi-static action execution: pushes translate, slides drag, picks
//! relocate, and anything in the way is plowed aside until separated.
//!
//! ```bash
//! cargo run --example push_dynamics
//! ```

use clutterbox::completion::{voxelize_primitive, PrimitiveSpec};
use clutterbox::dynamics::{
    apply_action, sweep_contacts, ActionInstance, ActionKind, ActionParams, GraspPose,
    GripperModel,
};
use clutterbox::geom::{RigidTransform, Vec3};
use clutterbox::rng::Pcg32;
use clutterbox::scene::{Camera, ObjectModel, Scene, Table, VoxelParams};

fn main() -> anyhow::Result<()> {
    let boxes = |x: f64, id: &str| {
        let shape = voxelize_primitive(&PrimitiveSpec::Box { size: [0.1, 0.1, 0.1] }, 0.01).unwrap();
        ObjectModel::new(id, shape, RigidTransform::planar(x, 0.0, 0.0, 0.0), [0.5; 3])
    };
    let mut scene = Scene {
        name: "dynamics-demo".into(),
        table: Table { extent: [1.0, 1.0], height: 0.0, floor_drop: 0.3 },
        camera: Camera::look_at(
            Vec3::new(0.0, -0.75, 0.65),
            Vec3::new(0.0, 0.05, 0.0),
            [110.0, 110.0],
            [160, 120],
        ),
        objects: vec![boxes(0.0, "a"), boxes(0.1, "b"), boxes(0.2, "c")],
        target: 0,
        voxel: VoxelParams::default(),
        table_color: [0.5, 0.45, 0.4],
    };
    let gripper = GripperModel::default();
    let mut rng = Pcg32::new(7);

    let push = ActionInstance {
        kind: ActionKind::Push,
        segment: 0,
        object: 0,
        params: ActionParams::Push { angle: 0.0, magnitude: 0.15 },
        grasp: GraspPose { point: [-0.08, 0.0], approach: 0.0 },
    };
    println!("predicted swept-hand contacts: {}", sweep_contacts(&scene, &push, &gripper));
    let out = apply_action(&mut scene, &push, &gripper, &mut rng)?;
    println!(
        "pushed `a` 0.15 m along +x: contacts {}, ejected {:?}, cap hit: {}",
        out.contact_count,
        out.ejected.iter().map(|&i| scene.objects[i].id.clone()).collect::<Vec<_>>(),
        out.cap_hit
    );
    for o in &scene.objects {
        let c = o.centroid_world();
        println!("  {} at ({:+.3}, {:+.3}){}", o.id, c.x, c.y, if o.ejected { "  [ejected]" } else { "" });
    }

    // A pick lifts over the clutter: nothing in between is disturbed.
    let pick = ActionInstance {
        kind: ActionKind::Pick,
        segment: 0,
        object: 0,
        params: ActionParams::Pick { x: -0.3, y: -0.2, yaw: 0.5, lift: 0.2 },
        grasp: GraspPose { point: [0.15, 0.0], approach: 0.0 },
    };
    let out = apply_action(&mut scene, &pick, &gripper, &mut rng)?;
    let c = scene.objects[0].centroid_world();
    println!(
        "picked `a` to (-0.3, -0.2): now at ({:+.3}, {:+.3}), contacts {}",
        c.x, c.y, out.contact_count
    );
    Ok(())
}
