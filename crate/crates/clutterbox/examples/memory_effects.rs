//! Volumetric memory across manipulation steps: free space seen once
//! stays known when it gets re-occluded, a moved object's volume carries
//! to its commanded pose, and unobserved belief decays toward the
//! occupancy threshold.
//!
//! ```bash
//! cargo run --example memory_effects
//! ```

use clutterbox::geom::RigidTransform;
use clutterbox::harness::scenario;
use clutterbox::planner::{build_view, EpisodeMemory, PlannerConfig};
use clutterbox::memory::{decay_unobserved, MemoryConfig};
use clutterbox::rng::Pcg32;
use clutterbox::voxel::{GridGeometry, OccupancyField};

fn main() -> anyhow::Result<()> {
    let mut scene = scenario("scene_a")?;
    let mut config = PlannerConfig::default();
    config.memory = true;
    let mut rng = Pcg32::new(1);

    // Step 1: initial view. The pitcher hides a large region.
    let v1 = build_view(&scene, &config, &EpisodeMemory::default(), &mut rng, None);
    println!("step 1: {} shadow voxels", v1.shadows.len());

    // Step 2: the pitcher is picked to the far corner; the region behind
    // its old pose is seen directly.
    let pitcher = scene.object_index("pitcher").unwrap();
    scene.objects[pitcher].pose = RigidTransform::planar(0.35, 0.30, 0.0, 0.0);
    let memory = EpisodeMemory { prev_field: Some(v1.field.clone()), prev_moved: None };
    let v2 = build_view(&scene, &config, &memory, &mut rng, None);
    println!("step 2 (pitcher moved, memory on): {} shadow voxels", v2.shadows.len());

    // Without memory the pitcher's new occlusion would all be unknown.
    let mut config_off = config.clone();
    config_off.memory = false;
    let mut rng_off = Pcg32::new(1);
    let v2_off = build_view(&scene, &config_off, &EpisodeMemory::default(), &mut rng_off, None);
    println!(
        "step 2 (memory off):              {} shadow voxels — negative memory retired {}",
        v2_off.shadows.len(),
        v2_off.shadows.len() as i64 - v2.shadows.len() as i64
    );

    // The decay law: unobserved belief relaxes toward the threshold.
    let cfg = MemoryConfig::enabled(0.8, 0.5);
    let mut field = OccupancyField::new(GridGeometry::cube(2, 0.01), 0.5);
    field.set_unknown_occupancy(0, 1.0);
    print!("decay of a believed-occupied voxel (alpha 0.8, tau 0.5): 1.000");
    for _ in 0..5 {
        decay_unobserved(&mut field, &cfg, 1);
        print!(" -> {:.3}", field.occupancy_linear(0));
    }
    println!();
    Ok(())
}
