//! Voxel grids, set algebra, and the Chamfer-style grid distance.
//!
//! ```bash
//! cargo run --example chamfer_basics
//! ```

use clutterbox::voxel::{chamfer_distance, grid_distance, save_grid, GridGeometry, VoxelGrid};

fn main() -> anyhow::Result<()> {
    // Two 16³ grids at 1 cm resolution: a solid block and the same block
    // shifted one voxel along x.
    let geom = GridGeometry::cube(16, 0.01);
    let mut a = VoxelGrid::new(geom);
    let mut b = VoxelGrid::new(geom);
    for x in 4..10 {
        for y in 4..10 {
            for z in 0..6 {
                a.set([x, y, z], true);
                b.set([x + 1, y, z], true);
            }
        }
    }
    println!("|A| = {}, |B| = {}", a.count_set(), b.count_set());

    let union = a.union(&b)?;
    let inter = a.intersection(&b)?;
    println!("|A ∪ B| = {}, |A ∩ B| = {}", union.count_set(), inter.count_set());
    println!("A ⊆ A ∪ B: {}", a.is_subset_of(&union)?);

    // The grid distance is the symmetric mean squared nearest-neighbor
    // distance between set-voxel centers.
    println!("D(A, A) = {}", grid_distance(&a, &a)?);
    println!("D(A, B) = {:.3e} m²", grid_distance(&a, &b)?);

    // The same metric on raw point sets.
    let d = chamfer_distance(&a.sparse_points(), &b.sparse_points())?;
    println!("chamfer(points(A), points(B)) = {d:.3e} m²");

    // Grids round-trip through a small binary format.
    let path = std::env::temp_dir().join("chamfer_basics_demo.vxg");
    save_grid(&a, &path)?;
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    std::fs::remove_file(&path).ok();
    Ok(())
}
