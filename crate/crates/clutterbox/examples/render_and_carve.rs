//! Render a depth observation of a scene and carve it into an occupancy
//! field: free where rays passed, occupied where they landed, unknown
//! everywhere the camera cannot see.
//!
//! ```bash
//! cargo run --example render_and_carve
//! ```

use clutterbox::harness::scenario;
use clutterbox::scene::{build_occupancy, render_observation, PixelLabel};
use clutterbox::voxel::CellState;

fn main() -> anyhow::Result<()> {
    let scene = scenario("scene_b")?;
    let obs = render_observation(&scene);

    let mut per_label = std::collections::BTreeMap::new();
    for label in &obs.labels {
        let name = match label {
            PixelLabel::Background => "background".to_string(),
            PixelLabel::Table => "table".to_string(),
            PixelLabel::Object(i) => scene.objects[*i as usize].id.clone(),
        };
        *per_label.entry(name).or_insert(0usize) += 1;
    }
    println!("observation {}x{} pixels:", obs.width, obs.height);
    for (name, count) in &per_label {
        println!("  {name:12} {count} px");
    }
    let returns = obs.depth.iter().filter(|d| **d > 0.0).count();
    println!("  depth returns: {returns} / {}", obs.pixel_count());
    println!("  digest: {:016x}", obs.digest());

    let geom = scene.workspace_geometry();
    let field = build_occupancy(&obs, &scene.camera, geom, 0.5);
    println!(
        "field {}x{}x{} voxels: free {}, occupied {}, unknown {}",
        geom.dims[0],
        geom.dims[1],
        geom.dims[2],
        field.count_state(CellState::Free),
        field.count_state(CellState::Occupied),
        field.count_state(CellState::Unknown),
    );
    Ok(())
}
