//! Exact voxel walk along a world-space segment.
//!
//! Steps from grid plane to grid plane so every voxel the segment passes
//! through is visited exactly once, in order. Shared by the depth
//! renderer, the occupancy carver, and occlusion raycasting so that all
//! three agree bit-for-bit on which voxels a ray touches.

use super::GridGeometry;
use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Walk {
    Continue,
    Stop,
}

/// Visit every voxel the segment a→b passes through, in order. The visitor
/// receives the voxel index and the segment parameter interval
/// [t_enter, t_exit] ⊆ [0, 1] it spans inside that voxel.
pub fn walk_segment<F>(geom: &GridGeometry, a: Vec3, b: Vec3, mut visit: F)
where
    F: FnMut([usize; 3], f64, f64) -> Walk,
{
    let d = b - a;
    let lo = geom.origin;
    let hi = geom.max_corner();

    // Clip [0,1] to the grid box with the slab method.
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    let axes = [(a.x, d.x, lo.x, hi.x), (a.y, d.y, lo.y, hi.y), (a.z, d.z, lo.z, hi.z)];
    for &(ac, dc, l, h) in &axes {
        if dc == 0.0 {
            if ac < l || ac >= h {
                return;
            }
        } else {
            let ta = (l - ac) / dc;
            let tb = (h - ac) / dc;
            let (tmin, tmax) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(tmin);
            t1 = t1.min(tmax);
            if t0 > t1 {
                return;
            }
        }
    }

    let res = geom.resolution;
    let p0 = a + d.scale(t0);
    let start = [p0.x, p0.y, p0.z];
    let origin = [lo.x, lo.y, lo.z];
    let dir = [d.x, d.y, d.z];
    let dims = geom.dims;

    let mut idx = [0i64; 3];
    let mut step = [0i64; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for axis in 0..3 {
        let cell = ((start[axis] - origin[axis]) / res).floor() as i64;
        idx[axis] = cell.clamp(0, dims[axis] as i64 - 1);
        if dir[axis] > 0.0 {
            step[axis] = 1;
            t_delta[axis] = res / dir[axis];
            let bound = origin[axis] + (idx[axis] + 1) as f64 * res;
            t_max[axis] = (bound - axes[axis].0) / dir[axis];
        } else if dir[axis] < 0.0 {
            step[axis] = -1;
            t_delta[axis] = res / -dir[axis];
            let bound = origin[axis] + idx[axis] as f64 * res;
            t_max[axis] = (bound - axes[axis].0) / dir[axis];
        }
    }

    let mut t_enter = t0;
    loop {
        // Smallest crossing; ties resolved in x, y, z order.
        let axis = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
            0
        } else if t_max[1] <= t_max[2] {
            1
        } else {
            2
        };
        let t_exit = t_max[axis];
        let voxel = [idx[0] as usize, idx[1] as usize, idx[2] as usize];
        if visit(voxel, t_enter, t_exit.min(t1)) == Walk::Stop {
            return;
        }
        if t_exit >= t1 {
            return;
        }
        idx[axis] += step[axis];
        if idx[axis] < 0 || idx[axis] >= dims[axis] as i64 {
            return;
        }
        t_enter = t_exit;
        t_max[axis] += t_delta[axis];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(geom: &GridGeometry, a: Vec3, b: Vec3) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        walk_segment(geom, a, b, |idx, _, _| {
            out.push(idx);
            Walk::Continue
        });
        out
    }

    #[test]
    fn axis_aligned_walk() {
        let geom = GridGeometry::cube(4, 1.0);
        let v = collect(&geom, Vec3::new(-1.0, 0.5, 0.5), Vec3::new(5.0, 0.5, 0.5));
        assert_eq!(v, vec![[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]]);
    }

    #[test]
    fn reversed_walk_visits_same_voxels() {
        let geom = GridGeometry::cube(8, 0.5);
        let a = Vec3::new(-0.3, 0.7, 0.2);
        let b = Vec3::new(4.4, 2.9, 3.7);
        let mut fwd = collect(&geom, a, b);
        let mut rev = collect(&geom, b, a);
        rev.reverse();
        fwd.sort();
        let mut rev_sorted = rev.clone();
        rev_sorted.sort();
        assert_eq!(fwd, rev_sorted);
    }

    #[test]
    fn segment_fully_outside_visits_nothing() {
        let geom = GridGeometry::cube(4, 1.0);
        assert!(collect(&geom, Vec3::new(10.0, 10.0, 10.0), Vec3::new(20.0, 10.0, 10.0)).is_empty());
    }

    #[test]
    fn degenerate_segment_visits_containing_voxel() {
        let geom = GridGeometry::cube(4, 1.0);
        let p = Vec3::new(2.5, 1.5, 0.5);
        assert_eq!(collect(&geom, p, p), vec![[2, 1, 0]]);
    }

    #[test]
    fn stops_inside_grid_at_segment_end() {
        let geom = GridGeometry::cube(4, 1.0);
        let v = collect(&geom, Vec3::new(0.5, 0.5, 0.5), Vec3::new(2.5, 0.5, 0.5));
        assert_eq!(v, vec![[0, 0, 0], [1, 0, 0], [2, 0, 0]]);
    }

    #[test]
    fn visited_voxels_are_connected_faces() {
        let geom = GridGeometry::cube(16, 0.25);
        let a = Vec3::new(-0.1, 3.9, 0.05);
        let b = Vec3::new(4.1, 0.1, 3.95);
        let v = collect(&geom, a, b);
        assert!(!v.is_empty());
        for w in v.windows(2) {
            let diff: usize = (0..3)
                .map(|k| w[0][k].abs_diff(w[1][k]))
                .sum();
            assert_eq!(diff, 1, "{:?} -> {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn interval_midpoints_lie_in_their_voxel() {
        let geom = GridGeometry::cube(8, 0.125);
        let a = Vec3::new(-0.05, 0.93, 0.21);
        let b = Vec3::new(1.03, 0.07, 0.99);
        let d = b - a;
        walk_segment(&geom, a, b, |idx, te, tx| {
            let mid = a + d.scale(0.5 * (te + tx));
            assert_eq!(geom.world_to_voxel(mid), Some(idx));
            Walk::Continue
        });
    }
}
