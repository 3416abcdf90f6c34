//! Occlusion shadows: the unknown voxels whose sight line to the camera
//! is blocked, attributed to whatever blocks them. These are the places a
//! hidden object can be, which is exactly where the planner searches.
//!
//! ```bash
//! cargo run --example shadows
//! ```

use clutterbox::harness::scenario;
use clutterbox::occlusion::{compute_occlusions, select_object};
use clutterbox::rng::Pcg32;
use clutterbox::scene::{carve_labeled, render_observation, PixelLabel, LABEL_NONE, LABEL_TABLE};
use clutterbox::voxel::save_grid;

fn main() -> anyhow::Result<()> {
    let scene = scenario("scene_a")?;
    let obs = render_observation(&scene);
    let geom = scene.workspace_geometry();
    let codes: Vec<u16> = obs
        .labels
        .iter()
        .map(|l| match l {
            PixelLabel::Background => LABEL_NONE,
            PixelLabel::Table => LABEL_TABLE,
            PixelLabel::Object(i) => 2 + *i,
        })
        .collect();
    let (field, labels) = carve_labeled(&obs, &scene.camera, geom, 0.5, &codes);

    let shadows = compute_occlusions(&field, &scene.camera);
    println!("{} shadow voxels", shadows.len());
    for (code, count) in shadows.count_by_label(&labels) {
        let name = match code {
             0 => "(remembered volume)".to_string(),
            1 => "table".to_string(),
            c => scene.objects[(c - 2) as usize].id.clone(),
        };
        println!("  cast by {name:12} {count}");
    }

    // Shadow-weighted object selection: big occluders get sampled more.
    let mut rng = Pcg32::new(42);
    let mut picks = std::collections::BTreeMap::new();
    for _ in 0..2000 {
        let code = select_object(&shadows, &labels, &mut rng)?;
        *picks.entry(scene.objects[(code - 2) as usize].id.clone()).or_insert(0usize) += 1;
    }
    println!("2000 shadow-weighted selections:");
    for (name, count) in &picks {
        println!("  {name:12} {count}");
    }

    // The shadow set exports as a binary grid for visualization tooling.
    let path = std::env::temp_dir().join("scene_a_shadows.vxg");
    save_grid(&shadows.to_grid(), &path)?;
    println!("wrote {}", path.display());
    std::fs::remove_file(&path).ok();
    Ok(())
}
