//! Depth rendering and observation-to-occupancy carving.
//!
//! Both walk the same workspace grid with the same segment traversal, so
//! the voxel a rendered depth identifies and the voxel the carver marks
//! occupied agree exactly.

use super::{Observation, PixelLabel, Scene, VoxelLabels, LABEL_NONE, LABEL_TABLE};

/// Display color of the room floor surrounding the table.
pub const FLOOR_COLOR: [f64; 3] = [0.25, 0.25, 0.25];
use crate::geom::Vec3;
use crate::scene::Camera;
use crate::voxel::{walk_segment, GridGeometry, OccupancyField, VoxelGrid, Walk};

/// Ground-truth world rasterized onto the workspace grid. Label codes:
/// 0 = empty, 1 = table, 2 + i = scene object index i.
#[derive(Debug, Clone)]
pub struct WorldRaster {
    pub geom: GridGeometry,
    pub occupied: VoxelGrid,
    pub labels: Vec<u16>,
}

pub(crate) fn object_code(index: usize) -> u16 {
    2 + index as u16
}

/// Rasterize table and all active objects onto the workspace grid.
pub fn rasterize(scene: &Scene) -> WorldRaster {
    let geom = scene.workspace_geometry();
    let mut occupied = VoxelGrid::new(geom);
    let mut labels = vec![0u16; geom.len()];

    // Table material fills z index 0 across the table extent.
    for y in 0..geom.dims[1] {
        for x in 0..geom.dims[0] {
            let c = geom.voxel_center([x, y, 0]);
            if scene.table.contains_xy(c.x, c.y) {
                let l = geom.linear([x, y, 0]);
                occupied.set_linear(l, true);
                labels[l] = LABEL_TABLE;
            }
        }
    }

    for (i, obj) in scene.active_objects() {
        let inv = obj.pose.inverse();
        let sg = obj.shape.geometry();
        // World AABB of the transformed shape volume.
        let lo = sg.origin;
        let hi = sg.max_corner();
        let mut wmin = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut wmax = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for corner in 0..8 {
            let p = Vec3::new(
                if corner & 1 == 0 { lo.x } else { hi.x },
                if corner & 2 == 0 { lo.y } else { hi.y },
                if corner & 4 == 0 { lo.z } else { hi.z },
            );
            let w = obj.pose.apply(p);
            wmin = Vec3::new(wmin.x.min(w.x), wmin.y.min(w.y), wmin.z.min(w.z));
            wmax = Vec3::new(wmax.x.max(w.x), wmax.y.max(w.y), wmax.z.max(w.z));
        }
        let res = geom.resolution;
        let to_idx = |v: f64, o: f64| ((v - o) / res).floor() as i64;
        let x0 = to_idx(wmin.x, geom.origin.x).max(0) as usize;
        let y0 = to_idx(wmin.y, geom.origin.y).max(0) as usize;
        let z0 = to_idx(wmin.z, geom.origin.z).max(1) as usize;
        let x1 = (to_idx(wmax.x, geom.origin.x) + 1).clamp(0, geom.dims[0] as i64 - 1) as usize;
        let y1 = (to_idx(wmax.y, geom.origin.y) + 1).clamp(0, geom.dims[1] as i64 - 1) as usize;
        let z1 = (to_idx(wmax.z, geom.origin.z) + 1).clamp(0, geom.dims[2] as i64 - 1) as usize;
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let l = geom.linear([x, y, z]);
                    if labels[l] != 0 {
                        continue;
                    }
                    let local = inv.apply(geom.voxel_center([x, y, z]));
                    if let Some(sidx) = sg.world_to_voxel(local) {
                        if obj.shape.get(sidx) {
                            occupied.set_linear(l, true);
                            labels[l] = object_code(i);
                        }
                    }
                }
            }
        }
    }

    WorldRaster { geom, occupied, labels }
}

/// Render a depth/color/label observation of the scene. Per-pixel rays
/// stop at the first occupied workspace voxel (object or table); pixels
/// that hit nothing report depth 0.
pub fn render_observation(scene: &Scene) -> Observation {
    let raster = rasterize(scene);
    render_raster(scene, &raster)
}

/// Render against a pre-built raster (lets callers reuse it).
pub fn render_raster(scene: &Scene, raster: &WorldRaster) -> Observation {
    let cam = &scene.camera;
    let geom = &raster.geom;
    let max_range = max_ray_range(cam, geom);
    let n = cam.pixel_count();
    let mut depth = vec![0.0f64; n];
    let mut color = vec![[0.0f64; 3]; n];
    let mut labels = vec![PixelLabel::Background; n];

    for py in 0..cam.height {
        for px in 0..cam.width {
            let pix = py * cam.width + px;
            let dir = cam.pixel_ray(px, py);
            let end = cam.position + dir.scale(max_range);
            let mut hit: Option<(f64, u16)> = None;
            walk_segment(geom, cam.position, end, |idx, t_enter, _| {
                let l = geom.linear(idx);
                if raster.occupied.get_linear(l) {
                    hit = Some((t_enter * max_range, raster.labels[l]));
                    Walk::Stop
                } else {
                    Walk::Continue
                }
            });
            if let Some((range, code)) = hit {
                depth[pix] = range;
                if code == LABEL_TABLE {
                    labels[pix] = PixelLabel::Table;
                    color[pix] = scene.table_color;
                } else {
                    let obj = (code - 2) as usize;
                    labels[pix] = PixelLabel::Object(obj as u16);
                    color[pix] = scene.objects[obj].color;
                }
            } else if dir.z < 0.0 {
                // Missed everything on the table: the ray lands on the room
                // floor, so the space it crossed is known free.
                let t_floor = (scene.table.floor_z() - cam.position.z) / dir.z;
                if t_floor > 0.0 {
                    depth[pix] = t_floor;
                    color[pix] = FLOOR_COLOR;
                }
            }
        }
    }

    Observation { width: cam.width, height: cam.height, depth, color, labels }
}

fn max_ray_range(cam: &Camera, geom: &GridGeometry) -> f64 {
    let lo = geom.origin;
    let hi = geom.max_corner();
    let mut far: f64 = 0.0;
    for corner in 0..8 {
        let p = Vec3::new(
            if corner & 1 == 0 { lo.x } else { hi.x },
            if corner & 2 == 0 { lo.y } else { hi.y },
            if corner & 4 == 0 { lo.z } else { hi.z },
        );
        far = far.max((p - cam.position).norm());
    }
    far * 1.25
}

/// Carve an occupancy field from an observation: along each returning
/// pixel ray, voxels strictly before the hit become observed-free and the
/// hit voxel observed-occupied (labeled with `pixel_codes`). Everything
/// else stays unobserved at the occupancy threshold.
pub fn carve_labeled(
    obs: &Observation,
    cam: &Camera,
    geom: GridGeometry,
    tau_occupancy: f64,
    pixel_codes: &[u16],
) -> (OccupancyField, VoxelLabels) {
    assert_eq!(pixel_codes.len(), obs.pixel_count());
    let mut field = OccupancyField::new(geom, tau_occupancy);
    let mut labels = VoxelLabels::new(geom);
    let max_range = max_ray_range(cam, &geom);

    for py in 0..obs.height {
        for px in 0..obs.width {
            let pix = py * obs.width + px;
            let d = obs.depth[pix];
            if d <= 0.0 {
                continue;
            }
            let dir = cam.pixel_ray(px, py);
            let end = cam.position + dir.scale(max_range);
            // The hit voxel is the one whose exit parameter passes the
            // measured range; the margin absorbs the divide roundoff.
            let t_hit = d / max_range + 1e-12;
            walk_segment(&geom, cam.position, end, |idx, _, t_exit| {
                let l = geom.linear(idx);
                if t_exit < t_hit {
                    field.mark_free(l);
                    Walk::Continue
                } else {
                    field.mark_occupied(l);
                    if labels.code_linear(l) == LABEL_NONE {
                        labels.set_linear(l, pixel_codes[pix]);
                    }
                    Walk::Stop
                }
            });
        }
    }

    (field, labels)
}

/// Spec-level carve: voxel labels come straight from the observation's
/// ground-truth pixel labels.
pub fn build_occupancy(
    obs: &Observation,
    cam: &Camera,
    geom: GridGeometry,
    tau_occupancy: f64,
) -> OccupancyField {
    let codes: Vec<u16> = obs
        .labels
        .iter()
        .map(|l| match l {
            PixelLabel::Background => LABEL_NONE,
            PixelLabel::Table => LABEL_TABLE,
            PixelLabel::Object(i) => object_code(*i as usize),
        })
        .collect();
    carve_labeled(obs, cam, geom, tau_occupancy, &codes).0
}
