//! Point sets and the symmetric mean-squared nearest-neighbor distance.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::voxel::VoxelGrid;

/// A finite list of 3D points in meters. NaN coordinates are rejected at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vec3>,
}

impl PointSet {
    pub fn new(points: Vec<Vec3>) -> Self {
        assert!(points.iter().all(|p| p.is_finite()), "points must be finite");
        PointSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec3> {
        self.points.iter()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn translated(&self, t: Vec3) -> PointSet {
        PointSet::new(self.points.iter().map(|p| *p + t).collect())
    }
}

impl FromIterator<Vec3> for PointSet {
    fn from_iter<I: IntoIterator<Item = Vec3>>(iter: I) -> Self {
        PointSet::new(iter.into_iter().collect())
    }
}

/// Exact nearest-neighbor index: points bucketed on a uniform cell grid,
/// queried by expanding Chebyshev shells. A shell at cell distance k can
/// only contain points at Euclidean distance >= (k-1) * cell, so the scan
/// terminates as soon as that bound exceeds the best squared distance —
/// the result is identical to an exhaustive scan.
struct NearestIndex<'a> {
    points: &'a [Vec3],
    cell: f64,
    buckets: HashMap<(i64, i64, i64), Vec<u32>>,
    key_lo: (i64, i64, i64),
    key_hi: (i64, i64, i64),
}

impl<'a> NearestIndex<'a> {
    fn build(points: &'a [Vec3]) -> Self {
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        let diag = (hi - lo).norm();
        // Aim for O(1) points per cell on uniformly spread data.
        let cell = if diag > 0.0 {
            (diag / (points.len() as f64).cbrt()).max(diag * 1e-9)
        } else {
            1.0
        };
        let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        let mut key_lo = (i64::MAX, i64::MAX, i64::MAX);
        let mut key_hi = (i64::MIN, i64::MIN, i64::MIN);
        for (i, p) in points.iter().enumerate() {
            let key = Self::key(cell, *p);
            key_lo = (key_lo.0.min(key.0), key_lo.1.min(key.1), key_lo.2.min(key.2));
            key_hi = (key_hi.0.max(key.0), key_hi.1.max(key.1), key_hi.2.max(key.2));
            buckets.entry(key).or_default().push(i as u32);
        }
        NearestIndex { points, cell, buckets, key_lo, key_hi }
    }

    fn key(cell: f64, p: Vec3) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    fn scan_bucket(&self, key: (i64, i64, i64), q: Vec3, best: &mut f64) {
        if let Some(ids) = self.buckets.get(&key) {
            for &i in ids {
                let d = (self.points[i as usize] - q).norm_sq();
                if d < *best {
                    *best = d;
                }
            }
        }
    }

    fn nearest_sq(&self, q: Vec3) -> f64 {
        let (cx, cy, cz) = Self::key(self.cell, q);
        // Distance from the query cell to the occupied key bounding box:
        // shells closer than this are empty, shells beyond max_k as well.
        let gap = |c: i64, lo: i64, hi: i64| {
            if c < lo {
                lo - c
            } else if c > hi {
                c - hi
            } else {
                0
            }
        };
        let span = |c: i64, lo: i64, hi: i64| (c - lo).max(hi - c).max(0);
        let min_k = gap(cx, self.key_lo.0, self.key_hi.0)
            .max(gap(cy, self.key_lo.1, self.key_hi.1))
            .max(gap(cz, self.key_lo.2, self.key_hi.2));
        let max_k = span(cx, self.key_lo.0, self.key_hi.0)
            .max(span(cy, self.key_lo.1, self.key_hi.1))
            .max(span(cz, self.key_lo.2, self.key_hi.2));
        let mut best = f64::INFINITY;
        for k in min_k..=max_k {
            if best.is_finite() {
                let lower = (k - 1) as f64 * self.cell;
                if lower > 0.0 && lower * lower > best {
                    break;
                }
            }
            if k == 0 {
                self.scan_bucket((cx, cy, cz), q, &mut best);
                continue;
            }
            // Chebyshev shell: two full z-faces, two y-strips, two x-strips.
            for dx in -k..=k {
                for dy in -k..=k {
                    self.scan_bucket((cx + dx, cy + dy, cz - k), q, &mut best);
                    self.scan_bucket((cx + dx, cy + dy, cz + k), q, &mut best);
                }
                for dz in -k + 1..=k - 1 {
                    self.scan_bucket((cx + dx, cy - k, cz + dz), q, &mut best);
                    self.scan_bucket((cx + dx, cy + k, cz + dz), q, &mut best);
                }
            }
            for dy in -k + 1..=k - 1 {
                for dz in -k + 1..=k - 1 {
                    self.scan_bucket((cx - k, cy + dy, cz + dz), q, &mut best);
                    self.scan_bucket((cx + k, cy + dy, cz + dz), q, &mut best);
                }
            }
        }
        best
    }
}

fn mean_nearest_sq(from: &PointSet, to: &PointSet) -> f64 {
    let sum: f64 = if to.len() <= 24 {
        from.iter()
            .map(|q| {
                to.iter()
                    .map(|p| (*p - *q).norm_sq())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    } else {
        let index = NearestIndex::build(to.points());
        from.iter().map(|q| index.nearest_sq(*q)).sum()
    };
    sum / from.len() as f64
}

/// Symmetric mean of squared nearest-neighbor distances between two
/// nonempty point sets.
pub fn chamfer_distance(x: &PointSet, y: &PointSet) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyPointSet { which: "X" });
    }
    if y.is_empty() {
        return Err(Error::EmptyPointSet { which: "Y" });
    }
    Ok(mean_nearest_sq(x, y) + mean_nearest_sq(y, x))
}

/// Distance between two voxel grids: the point-set distance of their set
/// voxel centers. Both grids must contain at least one set voxel.
pub fn grid_distance(u: &VoxelGrid, v: &VoxelGrid) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::EmptyGrid { which: "U" });
    }
    if v.is_empty() {
        return Err(Error::EmptyGrid { which: "V" });
    }
    chamfer_distance(&u.sparse_points(), &v.sparse_points())
}

/// Exhaustive double-loop reference implementation. Kept public so tests
/// and the acceptance suite can compare against the accelerated path.
pub fn chamfer_distance_brute(x: &PointSet, y: &PointSet) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyPointSet { which: "X" });
    }
    if y.is_empty() {
        return Err(Error::EmptyPointSet { which: "Y" });
    }
    let one_way = |from: &PointSet, to: &PointSet| -> f64 {
        let s: f64 = from
            .iter()
            .map(|q| {
                to.iter()
                    .map(|p| (*p - *q).norm_sq())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        s / from.len() as f64
    };
    Ok(one_way(x, y) + one_way(y, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Pcg32;
    use crate::voxel::GridGeometry;

    fn random_points(n: usize, rng: &mut Pcg32) -> PointSet {
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.range_f64(-1.0, 1.0),
                    rng.range_f64(-1.0, 1.0),
                    rng.range_f64(-1.0, 1.0),
                )
            })
            .collect()
    }

    #[test]
    fn identical_sets_give_zero() {
        let mut rng = Pcg32::new(1);
        let x = random_points(40, &mut rng);
        assert_eq!(chamfer_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn unit_offset_pair() {
        let x = PointSet::new(vec![Vec3::ZERO]);
        let y = PointSet::new(vec![Vec3::new(1.0, 0.0, 0.0)]);
        assert_eq!(chamfer_distance(&x, &y).unwrap(), 2.0);
    }

    #[test]
    fn empty_inputs_name_the_set() {
        let x = PointSet::new(vec![]);
        let y = PointSet::new(vec![Vec3::ZERO]);
        match chamfer_distance(&x, &y) {
            Err(Error::EmptyPointSet { which }) => assert_eq!(which, "X"),
            other => panic!("expected empty-set error, got {other:?}"),
        }
        match chamfer_distance(&y, &x) {
            Err(Error::EmptyPointSet { which }) => assert_eq!(which, "Y"),
            other => panic!("expected empty-set error, got {other:?}"),
        }
    }

    #[test]
    fn matches_brute_force_on_random_pairs() {
        let mut rng = Pcg32::new(2024);
        for _ in 0..40 {
            let x = random_points(50, &mut rng);
            let y = random_points(50, &mut rng);
            let fast = chamfer_distance(&x, &y).unwrap();
            let brute = chamfer_distance_brute(&x, &y).unwrap();
            let rel = (fast - brute).abs() / brute.max(1e-300);
            assert!(rel < 1e-9, "fast {fast} vs brute {brute}");
        }
    }

    #[test]
    fn symmetric_and_translation_invariant() {
        let mut rng = Pcg32::new(9);
        let x = random_points(30, &mut rng);
        let y = random_points(45, &mut rng);
        let d = chamfer_distance(&x, &y).unwrap();
        assert_eq!(d, chamfer_distance(&y, &x).unwrap());
        let t = Vec3::new(0.5, -0.25, 0.125);
        let dt = chamfer_distance(&x.translated(t), &y.translated(t)).unwrap();
        assert!((d - dt).abs() < 1e-9 * d.max(1.0));
    }

    #[test]
    fn grid_distance_composes() {
        let mut rng = Pcg32::new(77);
        let geom = GridGeometry::cube(16, 0.01);
        let mut u = VoxelGrid::new(geom);
        let mut v = VoxelGrid::new(geom);
        for l in 0..geom.len() {
            if rng.chance(0.05) {
                u.set_linear(l, true);
            }
            if rng.chance(0.05) {
                v.set_linear(l, true);
            }
        }
        let d = grid_distance(&u, &v).unwrap();
        let composed = chamfer_distance(&u.sparse_points(), &v.sparse_points()).unwrap();
        assert_eq!(d, composed);
    }

    #[test]
    fn adjacent_voxel_grids() {
        let geom = GridGeometry::cube(4, 0.02);
        let mut u = VoxelGrid::new(geom);
        let mut v = VoxelGrid::new(geom);
        u.set([1, 1, 1], true);
        v.set([2, 1, 1], true);
        let d = grid_distance(&u, &v).unwrap();
        let r = 0.02;
        assert!((d - 2.0 * r * r).abs() < 1e-15);
    }

    #[test]
    fn empty_grid_errors() {
        let geom = GridGeometry::cube(4, 0.02);
        let empty = VoxelGrid::new(geom);
        let mut v = VoxelGrid::new(geom);
        v.set([0, 0, 0], true);
        assert!(matches!(
            grid_distance(&empty, &v),
            Err(Error::EmptyGrid { which: "U" })
        ));
        assert!(matches!(
            grid_distance(&v, &empty),
            Err(Error::EmptyGrid { which: "V" })
        ));
    }
}
