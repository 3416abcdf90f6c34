//! Dense binary voxel grid, bit-packed 64 voxels to the word.

use super::GridGeometry;
use crate::error::{Error, Result};
use crate::voxel::chamfer::PointSet;

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    geom: GridGeometry,
    words: Vec<u64>,
}

impl VoxelGrid {
    pub fn new(geom: GridGeometry) -> Self {
        let words = vec![0u64; geom.len().div_ceil(64)];
        VoxelGrid { geom, words }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn get(&self, idx: [usize; 3]) -> bool {
        self.get_linear(self.geom.linear(idx))
    }

    pub fn get_linear(&self, l: usize) -> bool {
        (self.words[l / 64] >> (l % 64)) & 1 == 1
    }

    pub fn set(&mut self, idx: [usize; 3], value: bool) {
        self.set_linear(self.geom.linear(idx), value);
    }

    pub fn set_linear(&mut self, l: usize, value: bool) {
        let (w, b) = (l / 64, l % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn count_set(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.words.iter().enumerate().flat_map(move |(wi, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
        .filter(move |&l| l < self.geom.len())
        .map(move |l| self.geom.unlinear(l))
    }

    /// Centers of every set voxel, in world coordinates.
    pub fn sparse_points(&self) -> PointSet {
        PointSet::new(self.iter_set().map(|idx| self.geom.voxel_center(idx)).collect())
    }

    fn check_geometry(&self, other: &VoxelGrid, op: &str) -> Result<()> {
        if self.geom.same_as(&other.geom) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch(format!(
                "{op}: {:?}/{}/{:?} vs {:?}/{}/{:?}",
                self.geom.dims,
                self.geom.resolution,
                self.geom.origin,
                other.geom.dims,
                other.geom.resolution,
                other.geom.origin
            )))
        }
    }

    pub fn union(&self, other: &VoxelGrid) -> Result<VoxelGrid> {
        self.check_geometry(other, "union")?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        Ok(VoxelGrid { geom: self.geom, words })
    }

    pub fn intersection(&self, other: &VoxelGrid) -> Result<VoxelGrid> {
        self.check_geometry(other, "intersection")?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Ok(VoxelGrid { geom: self.geom, words })
    }

    pub fn difference(&self, other: &VoxelGrid) -> Result<VoxelGrid> {
        self.check_geometry(other, "difference")?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect();
        Ok(VoxelGrid { geom: self.geom, words })
    }

    pub fn is_subset_of(&self, other: &VoxelGrid) -> Result<bool> {
        self.check_geometry(other, "subset")?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    pub fn is_disjoint_from(&self, other: &VoxelGrid) -> Result<bool> {
        self.check_geometry(other, "disjoint")?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0))
    }

    /// Translate all set voxels by an integer index offset; voxels shifted
    /// outside the grid are dropped.
    pub fn shifted(&self, offset: [i64; 3]) -> VoxelGrid {
        let mut out = VoxelGrid::new(self.geom);
        for idx in self.iter_set() {
            let nx = idx[0] as i64 + offset[0];
            let ny = idx[1] as i64 + offset[1];
            let nz = idx[2] as i64 + offset[2];
            if nx >= 0 && ny >= 0 && nz >= 0 {
                let n = [nx as usize, ny as usize, nz as usize];
                if self.geom.contains(n) {
                    out.set(n, true);
                }
            }
        }
        out
    }

    /// Inclusive index bounding box of the set voxels.
    pub fn index_bounds(&self) -> Option<([usize; 3], [usize; 3])> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for idx in self.iter_set() {
            any = true;
            for a in 0..3 {
                lo[a] = lo[a].min(idx[a]);
                hi[a] = hi[a].max(idx[a]);
            }
        }
        any.then_some((lo, hi))
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::rng::Pcg32;

    fn random_grid(n: usize, fill: f64, rng: &mut Pcg32) -> VoxelGrid {
        let mut g = VoxelGrid::new(GridGeometry::cube(n, 0.01));
        for l in 0..g.geometry().len() {
            if rng.chance(fill) {
                g.set_linear(l, true);
            }
        }
        g
    }

    #[test]
    fn set_get_roundtrip() {
        let mut g = VoxelGrid::new(GridGeometry::new([4, 5, 6], 0.01, Vec3::ZERO));
        g.set([3, 4, 5], true);
        assert!(g.get([3, 4, 5]));
        assert_eq!(g.count_set(), 1);
        g.set([3, 4, 5], false);
        assert!(g.is_empty());
    }

    #[test]
    fn sparse_points_cardinality_and_roundtrip() {
        let mut rng = Pcg32::new(11);
        let g = random_grid(16, 0.1, &mut rng);
        let pts = g.sparse_points();
        assert_eq!(pts.len(), g.count_set());
        // Every point re-quantizes to a set voxel.
        for p in pts.iter() {
            let idx = g.geometry().world_to_voxel(*p).unwrap();
            assert!(g.get(idx));
        }
    }

    #[test]
    fn single_voxel_center() {
        let mut g = VoxelGrid::new(GridGeometry::cube(2, 0.01));
        g.set([0, 0, 0], true);
        let pts = g.sparse_points();
        assert_eq!(pts.len(), 1);
        let p = pts.iter().next().unwrap();
        assert_eq!((p.x, p.y, p.z), (0.005, 0.005, 0.005));
    }

    #[test]
    fn set_algebra_identities() {
        let mut rng = Pcg32::new(5);
        let a = random_grid(8, 0.3, &mut rng);
        let b = random_grid(8, 0.3, &mut rng);

        assert_eq!(a.intersection(&a).unwrap(), a);
        assert!(a.difference(&a).unwrap().is_empty());
        assert!(a.is_subset_of(&a).unwrap());

        let empty = VoxelGrid::new(*a.geometry());
        assert_eq!(a.union(&empty).unwrap(), a);

        // |a ∪ b| = |a| + |b| - |a ∩ b|
        let u = a.union(&b).unwrap().count_set();
        let i = a.intersection(&b).unwrap().count_set();
        assert_eq!(u, a.count_set() + b.count_set() - i);
    }

    #[test]
    fn geometry_mismatch_is_an_error() {
        let a = VoxelGrid::new(GridGeometry::cube(4, 0.01));
        let b = VoxelGrid::new(GridGeometry::cube(5, 0.01));
        assert!(a.union(&b).is_err());
        let c = VoxelGrid::new(GridGeometry::new([4, 4, 4], 0.02, Vec3::ZERO));
        assert!(a.intersection(&c).is_err());
    }

    #[test]
    fn shift_drops_out_of_bounds() {
        let mut g = VoxelGrid::new(GridGeometry::cube(4, 0.01));
        g.set([0, 0, 0], true);
        g.set([3, 3, 3], true);
        let s = g.shifted([1, 1, 1]);
        assert_eq!(s.count_set(), 1);
        assert!(s.get([1, 1, 1]));
    }
}
