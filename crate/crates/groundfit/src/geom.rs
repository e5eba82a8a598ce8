//! Small fixed-size vector math and least-squares plane fitting shared
//! across the crate.

use std::ops::{Add, Mul, Neg, Sub};

/// 3D vector in meters, vehicle frame (x forward, z up).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0, z: 0.0 };
    pub const UNIT_Z: Self = Self { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, rhs: Self) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Self) -> Self {
        Self {
            x: self.y * rhs.z - self.z * rhs.y,
            y: self.z * rhs.x - self.x * rhs.z,
            z: self.x * rhs.y - self.y * rhs.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction, or `None` for a (near-)zero input.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n < 1e-12 {
            None
        } else {
            Some(self * (1.0 / n))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Eigen-decomposition of a symmetric 3×3 matrix given as
/// `[a11, a12, a13, a22, a23, a33]`. Eigenvalues come out in descending
/// order with matching unit eigenvectors.
///
/// Analytic trigonometric form (Smith 1961); eigenvectors from the
/// largest-magnitude cross product of rows of `A - λI`.
pub fn sym_eigen3(m: [f64; 6]) -> ([f64; 3], [Vec3; 3]) {
    let [a11, a12, a13, a22, a23, a33] = m;

    let q = (a11 + a22 + a33) / 3.0;
    let p1 = a12 * a12 + a13 * a13 + a23 * a23;

    let mut values = if p1 < 1e-300 {
        // Already diagonal.
        let mut v = [a11, a22, a33];
        v.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        v
    } else {
        let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let inv_p = 1.0 / p;

        let b11 = (a11 - q) * inv_p;
        let b12 = a12 * inv_p;
        let b13 = a13 * inv_p;
        let b22 = (a22 - q) * inv_p;
        let b23 = a23 * inv_p;
        let b33 = (a33 - q) * inv_p;

        let half_det = (b11 * b22 * b33 + 2.0 * b12 * b13 * b23
            - b11 * b23 * b23
            - b22 * b13 * b13
            - b33 * b12 * b12)
            / 2.0;

        let phi = half_det.clamp(-1.0, 1.0).acos() / 3.0;

        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        [e1, e2, e3]
    };
    // Guard against rounding producing a marginally unsorted triple.
    values.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());

    let vectors = [
        eigenvector_for(m, values[0], 0),
        eigenvector_for(m, values[1], 1),
        eigenvector_for(m, values[2], 2),
    ];
    (values, vectors)
}

fn eigenvector_for(m: [f64; 6], lambda: f64, fallback_axis: usize) -> Vec3 {
    let [a11, a12, a13, a22, a23, a33] = m;
    let r0 = Vec3::new(a11 - lambda, a12, a13);
    let r1 = Vec3::new(a12, a22 - lambda, a23);
    let r2 = Vec3::new(a13, a23, a33 - lambda);

    let c0 = r0.cross(r1);
    let c1 = r0.cross(r2);
    let c2 = r1.cross(r2);

    let (m0, m1, m2) = (c0.norm_sq(), c1.norm_sq(), c2.norm_sq());
    let best = if m0 >= m1 && m0 >= m2 {
        c0
    } else if m1 >= m2 {
        c1
    } else {
        c2
    };

    match best.normalized() {
        Some(v) => v,
        // Degenerate (repeated eigenvalue): any axis is as good as another.
        None => match fallback_axis {
            0 => Vec3::new(1.0, 0.0, 0.0),
            1 => Vec3::new(0.0, 1.0, 0.0),
            _ => Vec3::UNIT_Z,
        },
    }
}

/// Orthogonal least-squares plane through a set of points: the plane passes
/// through the centroid and its normal is the smallest principal direction
/// of the scatter. Returns a unit normal with non-negative z and the offset
/// d of `n·p + d = 0`, or `None` when the points are too few or too close
/// to a line for a plane to be determined.
pub fn fit_plane_lsq(points: &[Vec3]) -> Option<(Vec3, f64)> {
    if points.len() < 3 {
        return None;
    }
    let inv_n = 1.0 / points.len() as f64;
    let mut centroid = Vec3::ZERO;
    for p in points {
        centroid = centroid + *p;
    }
    centroid = centroid * inv_n;

    let mut cov = [0.0f64; 6];
    for p in points {
        let d = *p - centroid;
        cov[0] += d.x * d.x;
        cov[1] += d.x * d.y;
        cov[2] += d.x * d.z;
        cov[3] += d.y * d.y;
        cov[4] += d.y * d.z;
        cov[5] += d.z * d.z;
    }
    for c in cov.iter_mut() {
        *c *= inv_n;
    }

    let (values, vectors) = sym_eigen3(cov);
    // Rank < 2 scatter (collinear points) leaves the normal unconstrained.
    if values[1] <= 1e-12 * values[0].max(1e-300) {
        return None;
    }
    let mut normal = vectors[2];
    if normal.z < 0.0 {
        normal = -normal;
    }
    let offset = -normal.dot(centroid);
    Some((normal, offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat_mul(m: [f64; 6], v: Vec3) -> Vec3 {
        Vec3::new(
            m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[1] * v.x + m[3] * v.y + m[4] * v.z,
            m[2] * v.x + m[4] * v.y + m[5] * v.z,
        )
    }

    #[test]
    fn cross_is_perpendicular() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-2.0, 0.5, 4.0);
        let c = a.cross(b);
        assert!(c.dot(a).abs() < 1e-12);
        assert!(c.dot(b).abs() < 1e-12);
    }

    #[test]
    fn eigen_diagonal() {
        let (vals, vecs) = sym_eigen3([3.0, 0.0, 0.0, 2.0, 0.0, 1.0]);
        assert_relative_eq!(vals[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(vals[2], 1.0, epsilon = 1e-12);
        assert!(vecs[0].x.abs() > 0.999);
        assert!(vecs[2].z.abs() > 0.999);
    }

    #[test]
    fn eigen_random_matrices_satisfy_av_eq_lv() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = [
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            ];
            let (vals, vecs) = sym_eigen3(m);
            assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
            for k in 0..3 {
                let av = mat_mul(m, vecs[k]);
                let lv = vecs[k] * vals[k];
                let err = (av - lv).norm();
                assert!(err < 1e-8, "residual {} for {:?}", err, m);
            }
        }
    }

    #[test]
    fn plane_fit_recovers_exact_plane() {
        let normal = Vec3::new(0.3, -0.2, 1.0).normalized().unwrap();
        let d = -1.7;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = Vec::new();
        for _ in 0..100 {
            let x = rng.gen_range(-10.0..10.0);
            let y = rng.gen_range(-10.0..10.0);
            // Solve n·p + d = 0 for z.
            let z = -(normal.x * x + normal.y * y + d) / normal.z;
            pts.push(Vec3::new(x, y, z));
        }
        let (n, off) = fit_plane_lsq(&pts).unwrap();
        assert!((n - normal).norm() < 1e-9);
        assert_relative_eq!(off, d, epsilon = 1e-9);
    }

    #[test]
    fn plane_fit_rejects_collinear() {
        let pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.5)).collect();
        assert!(fit_plane_lsq(&pts).is_none());
    }
}
