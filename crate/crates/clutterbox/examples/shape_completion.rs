//! Shape completion under hard constraints: the observed surface is kept,
//! known free space is never filled, and everything else is up to the
//! completer. Three geometric baselines complete a partially seen box.
//!
//! ```bash
//! cargo run --example shape_completion
//! ```

use clutterbox::completion::{
    complete, CameraExtrudeCompleter, Completer, CompletionInput, NullCompleter,
    PrismHullCompleter,
};
use clutterbox::geom::Vec3;
use clutterbox::voxel::{grid_distance, GridGeometry, VoxelGrid};

fn main() -> anyhow::Result<()> {
    // Ground truth: a 10x8x12 box inside a 24³ grid (1 cm voxels).
    let geom = GridGeometry::cube(24, 0.01);
    let mut truth = VoxelGrid::new(geom);
    for x in 7..17 {
        for y in 8..16 {
            for z in 0..12 {
                truth.set([x, y, z], true);
            }
        }
    }

    // A camera in front and above sees the front face and the top face;
    // the voxels it saw through are known free.
    let camera = Vec3::new(0.12, -0.5, 0.5);
    let mut partial = VoxelGrid::new(geom);
    let mut free = VoxelGrid::new(geom);
    for x in 7..17 {
        for z in 0..12 {
            partial.set([x, 8, z], true); // front face
        }
        for y in 8..16 {
            partial.set([x, y, 11], true); // top face
        }
        for z in 0..12 {
            for y in 0..8 {
                free.set([x, y, z], true); // carved space in front
            }
        }
    }
    let input = CompletionInput::new(partial.clone(), free)?;

    let completers: Vec<Box<dyn Completer>> = vec![
        Box::new(NullCompleter),
        Box::new(PrismHullCompleter),
        Box::new(CameraExtrudeCompleter::new(camera, 12)),
    ];
    println!(
        "truth {} voxels, observed surface {} voxels, D(partial, truth) = {:.3e}",
        truth.count_set(),
        partial.count_set(),
        grid_distance(&partial, &truth)?
    );
    for completer in &completers {
        let out = complete(completer.as_ref(), &input)?;
        let d = grid_distance(&out.completed, &truth)?;
        println!(
            "{:15} -> {:4} voxels, D(completed, truth) = {:.3e}, surface kept: {}, free respected: {}",
            completer.name(),
            out.completed.count_set(),
            d,
            input.partial.is_subset_of(&out.completed)?,
            out.completed.is_disjoint_from(&input.free)?,
        );
    }
    Ok(())
}
