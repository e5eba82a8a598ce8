//! Plane hypothesis sampling and inlier verification.
//!
//! Two verification predicates are provided: a distance-only test, and a
//! distance test combined with a tangent-perpendicularity test. The latter
//! requires the point's scan-row tangent to lie (nearly) in the candidate
//! plane, which suppresses planes that cut across surfaces instead of
//! following one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::Vec3;
use crate::scan::Point;
use crate::tangent::TangentField;

/// Candidate plane `n·x + d = 0` with a unit normal oriented upward
/// (`n.z >= 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneHypothesis {
    pub normal: Vec3,
    pub offset: f64,
}

impl PlaneHypothesis {
    /// Build from an (unnormalized) normal and offset, canonicalizing the
    /// orientation. `None` for a degenerate normal.
    pub fn new(normal: Vec3, offset: f64) -> Option<Self> {
        let scale = 1.0 / normal.norm();
        if !scale.is_finite() || normal.norm() < 1e-12 {
            return None;
        }
        let mut n = normal * scale;
        let mut d = offset * scale;
        let flip = n.z < 0.0
            || (n.z == 0.0 && (n.y < 0.0 || (n.y == 0.0 && n.x < 0.0)));
        if flip {
            n = -n;
            d = -d;
        }
        Some(Self { normal: n, offset: d })
    }

    /// Plane through three points; `None` when they are (nearly) collinear.
    pub fn from_points(a: Vec3, b: Vec3, c: Vec3) -> Option<Self> {
        let ab = b - a;
        let ac = c - a;
        let cross = ab.cross(ac);
        // Relative collinearity gate: the triangle area must not vanish
        // against the edge lengths.
        if cross.norm() <= 1e-6 * ab.norm() * ac.norm() {
            return None;
        }
        let n = cross.normalized()?;
        Self::new(n, -n.dot(a))
    }

    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) + self.offset
    }

    pub fn distance(&self, p: Vec3) -> f64 {
        self.signed_distance(p).abs()
    }

    /// Angle between the plane normal and vertical, radians.
    pub fn tilt(&self) -> f64 {
        self.normal.z.clamp(-1.0, 1.0).acos()
    }
}

/// Inlier-verification thresholds.
#[derive(Debug, Clone, Copy)]
pub struct VerifyParams {
    /// Point-plane distance threshold, meters (strict `<`).
    pub epsilon: f64,
    /// Tangent-perpendicularity angle threshold, radians (strict `<`).
    pub delta: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self { epsilon: 0.2, delta: 10f64.to_radians() }
    }
}

/// Boolean inlier mask aligned with the point slice it was computed over,
/// with a cached popcount.
#[derive(Debug, Clone, PartialEq)]
pub struct InlierMask {
    bits: Vec<bool>,
    count: usize,
}

impl InlierMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let count = bits.iter().filter(|&&b| b).count();
        Self { bits, count }
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of set entries.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// True when every inlier of `self` is also an inlier of `other`.
    pub fn is_subset_of(&self, other: &InlierMask) -> bool {
        self.bits.len() == other.bits.len()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

#[derive(Debug, Error)]
pub enum RansacError {
    #[error("need at least 3 points to sample plane hypotheses, got {0}")]
    NotEnoughPoints(usize),
    #[error("could not sample {wanted} valid hypotheses in {attempts} attempts")]
    Degenerate { wanted: usize, attempts: usize },
}

/// Sample `m` plane hypotheses from random point triples. Triples that are
/// collinear or whose plane tilts from horizontal by more than `max_tilt`
/// (when given) are resampled; after `100·m` failed attempts the input is
/// considered pathological. Deterministic for a given seed.
pub fn sample_hypotheses(
    points: &[Point],
    m: usize,
    max_tilt: Option<f64>,
    seed: u64,
) -> Result<Vec<PlaneHypothesis>, RansacError> {
    assert!(m >= 1, "hypothesis count must be at least 1");
    if points.len() < 3 {
        return Err(RansacError::NotEnoughPoints(points.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hypotheses = Vec::with_capacity(m);
    let max_attempts = 100 * m;
    let mut attempts = 0;

    while hypotheses.len() < m {
        if attempts >= max_attempts {
            return Err(RansacError::Degenerate { wanted: m, attempts });
        }
        attempts += 1;

        let i = rng.gen_range(0..points.len());
        let mut j = rng.gen_range(0..points.len());
        while j == i {
            j = rng.gen_range(0..points.len());
        }
        let mut k = rng.gen_range(0..points.len());
        while k == i || k == j {
            k = rng.gen_range(0..points.len());
        }

        let Some(plane) = PlaneHypothesis::from_points(points[i].pos(), points[j].pos(), points[k].pos())
        else {
            continue;
        };
        if let Some(limit) = max_tilt {
            if plane.tilt() > limit {
                continue;
            }
        }
        hypotheses.push(plane);
    }
    Ok(hypotheses)
}

/// Distance-only inlier verification: `|n·x + d| < ε`.
pub fn verify_distance(plane: &PlaneHypothesis, points: &[Point], epsilon: f64) -> InlierMask {
    let bits = points.iter().map(|p| plane.distance(p.pos()) < epsilon).collect();
    InlierMask::from_bits(bits)
}

/// Whether a single point passes the distance + tangent test. `sin_delta`
/// is the precomputed sine of the angle threshold: requiring the
/// tangent-vs-normal angle to be within δ of perpendicular is exactly
/// `|n·t| < sin δ`.
pub(crate) fn tangent_inlier(
    plane: &PlaneHypothesis,
    point: &Point,
    tangents: &TangentField,
    epsilon: f64,
    sin_delta: f64,
) -> bool {
    if plane.distance(point.pos()) >= epsilon {
        return false;
    }
    match tangents.get(point.point_id) {
        // No tangent means the perpendicularity requirement cannot be
        // verified; exclude the point.
        None => false,
        Some(t) => plane.normal.dot(t).abs() < sin_delta,
    }
}

/// Distance + tangent-perpendicularity inlier verification.
pub fn verify_tangent(
    plane: &PlaneHypothesis,
    points: &[Point],
    tangents: &TangentField,
    params: &VerifyParams,
) -> InlierMask {
    let sin_delta = params.delta.sin();
    let bits = points
        .iter()
        .map(|p| tangent_inlier(plane, p, tangents, params.epsilon, sin_delta))
        .collect();
    InlierMask::from_bits(bits)
}

/// Sample `m` hypotheses and return the one with the most inliers, with its
/// mask and hypothesis index. Verification is tangent-based when a tangent
/// field is given, distance-only otherwise. Ties go to the lowest index.
pub fn fit_single_plane(
    points: &[Point],
    tangents: Option<&TangentField>,
    params: &VerifyParams,
    m: usize,
    max_tilt: Option<f64>,
    seed: u64,
) -> Result<(usize, PlaneHypothesis, InlierMask), RansacError> {
    let hypotheses = sample_hypotheses(points, m, max_tilt, seed)?;
    let mut best: Option<(usize, InlierMask)> = None;
    for (idx, plane) in hypotheses.iter().enumerate() {
        let mask = match tangents {
            Some(field) => verify_tangent(plane, points, field, params),
            None => verify_distance(plane, points, params.epsilon),
        };
        let better = match &best {
            None => true,
            Some((_, best_mask)) => mask.count() > best_mask.count(),
        };
        if better {
            best = Some((idx, mask));
        }
    }
    let (idx, mask) = best.expect("m >= 1 guarantees a winner");
    Ok((idx, hypotheses[idx], mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tangent::TangentField;
    use proptest::prelude::*;
    use rand::Rng;

    fn pt(x: f64, y: f64, z: f64, id: u32) -> Point {
        Point { x, y, z, beam: 0, azimuth_step: 0, point_id: id }
    }

    fn grid_z0(n: usize) -> Vec<Point> {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let id = (i * n + j) as u32;
                pts.push(pt(i as f64, j as f64, 0.0, id));
            }
        }
        pts
    }

    #[test]
    fn unique_plane_from_flat_points() {
        let pts = grid_z0(5);
        let hyps = sample_hypotheses(&pts, 1, Some(45f64.to_radians()), 3).unwrap();
        let plane = hyps[0];
        assert!((plane.normal - Vec3::UNIT_Z).norm() < 1e-6);
        assert!(plane.offset.abs() < 1e-6);
    }

    #[test]
    fn collinear_points_fail_sampling() {
        let pts: Vec<Point> = (0..5).map(|i| pt(i as f64, 0.0, 0.0, i as u32)).collect();
        assert!(matches!(
            sample_hypotheses(&pts, 1, None, 0),
            Err(RansacError::Degenerate { .. })
        ));
    }

    #[test]
    fn too_few_points_rejected() {
        let pts = vec![pt(0.0, 0.0, 0.0, 0), pt(1.0, 0.0, 0.0, 1)];
        assert!(matches!(
            sample_hypotheses(&pts, 1, None, 0),
            Err(RansacError::NotEnoughPoints(2))
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut rng = rand::thread_rng();
        let pts: Vec<Point> = (0..100)
            .map(|i| pt(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-1.0..1.0), i))
            .collect();
        let a = sample_hypotheses(&pts, 20, Some(45f64.to_radians()), 99).unwrap();
        let b = sample_hypotheses(&pts, 20, Some(45f64.to_radians()), 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distance_threshold_is_strict() {
        let plane = PlaneHypothesis::new(Vec3::UNIT_Z, 0.0).unwrap();
        let inside = vec![pt(0.0, 0.0, 0.1, 0)];
        let boundary = vec![pt(0.0, 0.0, 0.2, 0)];
        assert_eq!(verify_distance(&plane, &inside, 0.2).count(), 1);
        assert_eq!(verify_distance(&plane, &boundary, 0.2).count(), 0);
    }

    #[test]
    fn distance_mask_matches_direct_formula() {
        let mut rng = rand::thread_rng();
        for _ in 0..20 {
            let n = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.1..1.0),
            );
            let plane = PlaneHypothesis::new(n, rng.gen_range(-2.0..2.0)).unwrap();
            let pts: Vec<Point> = (0..200)
                .map(|i| {
                    pt(
                        rng.gen_range(-10.0..10.0),
                        rng.gen_range(-10.0..10.0),
                        rng.gen_range(-3.0..3.0),
                        i,
                    )
                })
                .collect();
            let eps = rng.gen_range(0.05..0.5);
            let mask = verify_distance(&plane, &pts, eps);
            for (i, p) in pts.iter().enumerate() {
                let d = (plane.normal.x * p.x + plane.normal.y * p.y + plane.normal.z * p.z
                    + plane.offset)
                    .abs();
                assert_eq!(mask.get(i), d < eps, "mismatch at point {i}");
            }
        }
    }

    #[test]
    fn tangent_perpendicular_passes_parallel_fails() {
        let plane = PlaneHypothesis::new(Vec3::UNIT_Z, 0.0).unwrap();
        let pts = vec![pt(0.0, 0.0, 0.0, 0)];
        let params = VerifyParams::default();

        let mut perp = TangentField::empty(1);
        perp.set(0, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(verify_tangent(&plane, &pts, &perp, &params).count(), 1);

        let mut para = TangentField::empty(1);
        para.set(0, Vec3::UNIT_Z);
        assert_eq!(verify_tangent(&plane, &pts, &para, &params).count(), 0);
    }

    #[test]
    fn tangentless_points_are_excluded() {
        let plane = PlaneHypothesis::new(Vec3::UNIT_Z, 0.0).unwrap();
        let pts = vec![pt(0.0, 0.0, 0.0, 0)];
        let field = TangentField::empty(1);
        assert_eq!(verify_tangent(&plane, &pts, &field, &VerifyParams::default()).count(), 0);
    }

    #[test]
    fn negating_plane_coefficients_keeps_masks() {
        // Canonicalization means building from (−n, −d) yields the same plane.
        let a = PlaneHypothesis::new(Vec3::new(0.1, -0.2, 0.9), 0.7).unwrap();
        let b = PlaneHypothesis::new(Vec3::new(-0.1, 0.2, -0.9), -0.7).unwrap();
        assert!((a.normal - b.normal).norm() < 1e-12);
        assert!((a.offset - b.offset).abs() < 1e-12);
    }

    #[test]
    fn single_hypothesis_is_returned_regardless_of_quality() {
        let mut pts = grid_z0(4);
        pts.push(pt(0.5, 0.5, 5.0, 100));
        let (idx, _, _) =
            fit_single_plane(&pts, None, &VerifyParams::default(), 1, None, 5).unwrap();
        assert_eq!(idx, 0);
    }

    #[test]
    fn sign_flip_of_all_tangents_keeps_masks() {
        let mut rng = rand::thread_rng();
        let pts: Vec<Point> = (0..100)
            .map(|i| {
                pt(
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-0.5..0.5),
                    i,
                )
            })
            .collect();
        let mut field = TangentField::empty(100);
        for i in 0..100u32 {
            let t = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if let Some(t) = t.normalized() {
                field.set(i, t);
            }
        }
        let plane = PlaneHypothesis::new(Vec3::new(0.2, 0.1, 1.0), 0.1).unwrap();
        let params = VerifyParams::default();
        let a = verify_tangent(&plane, &pts, &field, &params);
        let b = verify_tangent(&plane, &pts, &field.flipped(), &params);
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn tangent_mask_is_subset_of_distance_mask(
            seed in 0u64..1000,
            nx in -1.0f64..1.0,
            ny in -1.0f64..1.0,
            nz in 0.1f64..1.0,
            d in -2.0f64..2.0,
            eps in 0.05f64..0.5,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Point> = (0..150)
                .map(|i| pt(
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-2.0..2.0),
                    i,
                ))
                .collect();
            let mut field = TangentField::empty(150);
            for i in 0..150u32 {
                if rng.gen_bool(0.8) {
                    let t = Vec3::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    );
                    if let Some(t) = t.normalized() {
                        field.set(i, t);
                    }
                }
            }
            let plane = PlaneHypothesis::new(Vec3::new(nx, ny, nz), d).unwrap();
            let params = VerifyParams { epsilon: eps, ..Default::default() };
            let tangent = verify_tangent(&plane, &pts, &field, &params);
            let distance = verify_distance(&plane, &pts, eps);
            prop_assert!(tangent.is_subset_of(&distance));
        }

        #[test]
        fn popcount_is_monotone_in_epsilon(
            seed in 0u64..1000,
            nx in -1.0f64..1.0,
            ny in -1.0f64..1.0,
            nz in 0.1f64..1.0,
            d in -2.0f64..2.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Point> = (0..150)
                .map(|i| pt(
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-2.0..2.0),
                    i,
                ))
                .collect();
            let plane = PlaneHypothesis::new(Vec3::new(nx, ny, nz), d).unwrap();
            let mut last = 0usize;
            for eps in [0.05, 0.1, 0.2, 0.4] {
                let count = verify_distance(&plane, &pts, eps).count();
                prop_assert!(count >= last);
                last = count;
            }
        }
    }

    #[test]
    fn masks_invariant_under_rotation_about_z() {
        let mut rng = rand::thread_rng();
        let pts: Vec<Point> = (0..200)
            .map(|i| {
                pt(
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-2.0..2.0),
                    i,
                )
            })
            .collect();
        let mut field = TangentField::empty(200);
        for i in 0..200u32 {
            let t = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if let Some(t) = t.normalized() {
                field.set(i, t);
            }
        }
        let plane = PlaneHypothesis::new(Vec3::new(0.15, -0.05, 1.0), 0.3).unwrap();
        let params = VerifyParams::default();
        let base = verify_tangent(&plane, &pts, &field, &params);

        let theta = 0.7f64;
        let (s, c) = theta.sin_cos();
        let rot = |v: Vec3| Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z);
        let pts_rot: Vec<Point> = pts
            .iter()
            .map(|p| {
                let q = rot(p.pos());
                Point { x: q.x, y: q.y, z: q.z, ..*p }
            })
            .collect();
        let mut field_rot = TangentField::empty(200);
        for (id, t) in field.iter() {
            field_rot.set(id, rot(t));
        }
        let plane_rot = PlaneHypothesis::new(rot(plane.normal), plane.offset).unwrap();
        let rotated = verify_tangent(&plane_rot, &pts_rot, &field_rot, &params);
        assert_eq!(base, rotated);
    }
}
