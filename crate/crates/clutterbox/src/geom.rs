//! Minimal 3D vector / rotation / rigid-transform math.
//!
//! Everything is plain `f64`. Rotations are 3x3 matrices built from
//! axis-angle helpers; no external linear-algebra crate so that results
//! are bit-reproducible across platforms and easy to audit.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        Vec3::new(self.x / n, self.y / n, self.z / n)
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Table-plane (x, y) distance to another point.
    pub fn planar_distance(self, o: Vec3) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Rotation about the table normal (+z) by `yaw` radians.
    pub fn yaw(yaw: f64) -> Mat3 {
        let (s, c) = yaw.sin_cos();
        Mat3 {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Intrinsic roll (x), pitch (y), yaw (z) composition: R = Rz * Ry * Rx.
    pub fn from_rpy(roll: f64, pitch: f64, yaw: f64) -> Mat3 {
        let (sr, cr) = roll.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let (sy, cy) = yaw.sin_cos();
        Mat3 {
            m: [
                [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
                [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
                [-sp, cp * sr, cp * cr],
            ],
        }
    }

    pub fn apply(self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn transpose(self) -> Mat3 {
        let m = self.m;
        Mat3 {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn matmul(self, o: Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        Mat3 { m: r }
    }
}

/// Rigid transform p -> rot * p + trans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rot: Mat3,
    pub trans: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rot: Mat3::IDENTITY,
        trans: Vec3::ZERO,
    };

    pub fn new(rot: Mat3, trans: Vec3) -> Self {
        RigidTransform { rot, trans }
    }

    pub fn translation(t: Vec3) -> Self {
        RigidTransform { rot: Mat3::IDENTITY, trans: t }
    }

    /// Planar pose: yaw about +z then translate. The usual object pose on a table.
    pub fn planar(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        RigidTransform { rot: Mat3::yaw(yaw), trans: Vec3::new(x, y, z) }
    }

    /// Rotation by `yaw` about the vertical axis through `pivot`, then translate by `delta`.
    pub fn yaw_about(pivot: Vec3, yaw: f64, delta: Vec3) -> Self {
        let rot = Mat3::yaw(yaw);
        let trans = pivot - rot.apply(pivot) + delta;
        RigidTransform { rot, trans }
    }

    pub fn apply(self, p: Vec3) -> Vec3 {
        self.rot.apply(p) + self.trans
    }

    pub fn inverse(self) -> RigidTransform {
        let rt = self.rot.transpose();
        RigidTransform { rot: rt, trans: -rt.apply(self.trans) }
    }

    /// self ∘ other: apply `other` first, then `self`.
    pub fn compose(self, other: RigidTransform) -> RigidTransform {
        RigidTransform {
            rot: self.rot.matmul(other.rot),
            trans: self.rot.apply(other.trans) + self.trans,
        }
    }
}

/// Convex hull of 2D points (Andrew's monotone chain), counter-clockwise,
/// without the closing point. Degenerate inputs (fewer than 3 distinct
/// points, collinear sets) return what survives: 1-2 points or the chain.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Point-in-convex-polygon test, boundary inclusive to `eps`. The polygon
/// must be counter-clockwise. Degenerate polygons (point / segment) test
/// distance to that point or segment.
pub fn point_in_convex_polygon(p: [f64; 2], hull: &[[f64; 2]], eps: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => {
            let dx = p[0] - hull[0][0];
            let dy = p[1] - hull[0][1];
            (dx * dx + dy * dy).sqrt() <= eps
        }
        2 => point_segment_distance(p, hull[0], hull[1]) <= eps,
        _ => {
            for i in 0..hull.len() {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                if cross < -eps {
                    return false;
                }
            }
            true
        }
    }
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len_sq = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len_sq > 0.0 {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}
