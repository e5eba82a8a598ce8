//! Comparison baselines: single-plane RANSAC with distance-only
//! verification, and iterative plane fitting over a fixed longitudinal
//! partition seeded from the lowest points per slab.

use crate::config::DetectorConfig;
use crate::geom::{fit_plane_lsq, Vec3};
use crate::partition::{DetectError, GroundLabeling, Outcome};
use crate::ransac::{self, InlierMask, PlaneHypothesis};
use crate::scan::{crop_radius, grid_downsample, Point};

/// Parameters of the fixed-partition baseline.
#[derive(Debug, Clone)]
pub struct LprParams {
    /// Longitudinal (x) slab count.
    pub num_segments: usize,
    /// Plane refit rounds per slab.
    pub num_iterations: usize,
    /// How many lowest points seed the height estimate.
    pub num_lpr: usize,
    /// Points within this margin above the lowest-point mean height are
    /// admitted as seeds, meters.
    pub seed_height_margin: f64,
    /// Inlier distance threshold, meters.
    pub epsilon: f64,
    /// Half extent of the slabbed region along x, meters.
    pub extent: f64,
}

impl Default for LprParams {
    fn default() -> Self {
        Self {
            num_segments: 3,
            num_iterations: 3,
            num_lpr: 20,
            seed_height_margin: 0.4,
            epsilon: 0.2,
            extent: 40.0,
        }
    }
}

impl LprParams {
    pub fn from_config(config: &DetectorConfig) -> Self {
        Self { epsilon: config.epsilon, extent: config.crop_radius, ..Default::default() }
    }
}

/// Single-plane RANSAC with distance-only verification over the given
/// points. Returns the winning plane and its inlier mask.
pub fn vanilla_ransac(
    points: &[Point],
    m: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(PlaneHypothesis, InlierMask), ransac::RansacError> {
    let params = ransac::VerifyParams { epsilon, ..Default::default() };
    let (_, plane, mask) = ransac::fit_single_plane(points, None, &params, m, None, seed)?;
    Ok((plane, mask))
}

/// Slab index of a point; positions beyond the slabbed extent clamp into
/// the edge slabs so nothing is dropped.
fn slab_of(x: f64, params: &LprParams) -> usize {
    let width = 2.0 * params.extent / params.num_segments as f64;
    let i = ((x + params.extent) / width).floor();
    (i.max(0.0) as usize).min(params.num_segments - 1)
}

/// Fit one plane per longitudinal slab. Seeds are the points no higher
/// than `seed_height_margin` above the mean height of the `num_lpr` lowest
/// points; each round fits an orthogonal least-squares plane and re-selects
/// inliers by distance. Slabs with too few seeds are skipped.
pub fn lpr_fit(points: &[Point], params: &LprParams, id_space: usize) -> GroundLabeling {
    let mut slabs: Vec<Vec<usize>> = vec![Vec::new(); params.num_segments];
    for (i, p) in points.iter().enumerate() {
        slabs[slab_of(p.x, params)].push(i);
    }

    let mut planes: Vec<Option<PlaneHypothesis>> = vec![None; params.num_segments];
    let mut ground = vec![false; id_space];

    for (slab_idx, slab) in slabs.iter().enumerate() {
        if slab.len() < 3 {
            continue;
        }
        // Mean height of the lowest returns anchors the seed band.
        let mut heights: Vec<f64> = slab.iter().map(|&i| points[i].z).collect();
        heights.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let take = params.num_lpr.min(heights.len());
        let lpr_mean: f64 = heights[..take].iter().sum::<f64>() / take as f64;
        let threshold = lpr_mean + params.seed_height_margin;

        let mut current: Vec<usize> =
            slab.iter().copied().filter(|&i| points[i].z <= threshold).collect();
        if current.len() < 3 {
            continue;
        }

        let mut plane: Option<PlaneHypothesis> = None;
        for _ in 0..params.num_iterations {
            let positions: Vec<Vec3> = current.iter().map(|&i| points[i].pos()).collect();
            let Some((normal, offset)) = fit_plane_lsq(&positions) else { break };
            let Some(fitted) = PlaneHypothesis::new(normal, offset) else { break };
            current = slab
                .iter()
                .copied()
                .filter(|&i| fitted.distance(points[i].pos()) < params.epsilon)
                .collect();
            plane = Some(fitted);
            if current.len() < 3 {
                break;
            }
        }

        if let Some(fitted) = plane {
            for &i in slab {
                if fitted.distance(points[i].pos()) < params.epsilon {
                    ground[points[i].point_id as usize] = true;
                }
            }
            planes[slab_idx] = Some(fitted);
        }
    }

    GroundLabeling {
        ground,
        outcome: Outcome::FixedSlabs { planes, extent: params.extent },
    }
}

/// Crop, downsample, fit a single distance-verified plane, and label the
/// cropped full-resolution cloud with it.
pub fn vanilla_pipeline(
    points: &[Point],
    config: &DetectorConfig,
) -> Result<GroundLabeling, DetectError> {
    let id_space = points.iter().map(|p| p.point_id as usize + 1).max().unwrap_or(0);
    let cropped = crop_radius(points, config.crop_radius);
    let fit_cloud = grid_downsample(&cropped, config.downsample);
    let (plane, _) = vanilla_ransac(&fit_cloud, config.hypotheses, config.epsilon, config.seed)?;

    let mut ground = vec![false; id_space];
    for p in &cropped {
        if plane.distance(p.pos()) < config.epsilon {
            ground[p.point_id as usize] = true;
        }
    }
    Ok(GroundLabeling { ground, outcome: Outcome::SinglePlane { plane, fallback: false } })
}

/// Crop, downsample, fit fixed slabs, and label the cropped full-resolution
/// cloud with the per-slab planes.
pub fn lpr_pipeline(
    points: &[Point],
    config: &DetectorConfig,
) -> Result<GroundLabeling, DetectError> {
    let id_space = points.iter().map(|p| p.point_id as usize + 1).max().unwrap_or(0);
    let params = LprParams::from_config(config);
    let cropped = crop_radius(points, config.crop_radius);
    let fit_cloud = grid_downsample(&cropped, config.downsample);
    let fitted = lpr_fit(&fit_cloud, &params, id_space);

    let Outcome::FixedSlabs { planes, extent } = &fitted.outcome else { unreachable!() };
    let mut ground = vec![false; id_space];
    for p in &cropped {
        if let Some(plane) = &planes[slab_of(p.x, &params)] {
            if plane.distance(p.pos()) < params.epsilon {
                ground[p.point_id as usize] = true;
            }
        }
    }
    Ok(GroundLabeling {
        ground,
        outcome: Outcome::FixedSlabs { planes: planes.clone(), extent: *extent },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64, z: f64, id: u32) -> Point {
        Point { x, y, z, beam: 0, azimuth_step: 0, point_id: id }
    }

    fn flat_cloud(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                pt(
                    rng.gen_range(-35.0..35.0),
                    rng.gen_range(-35.0..35.0),
                    rng.gen_range(-0.02..0.02),
                    i as u32,
                )
            })
            .collect()
    }

    #[test]
    fn vanilla_fits_flat_cloud() {
        let pts = flat_cloud(2000, 1);
        let (plane, mask) = vanilla_ransac(&pts, 100, 0.2, 7).unwrap();
        assert!(plane.tilt().to_degrees() < 0.5);
        assert!(mask.count() as f64 / pts.len() as f64 > 0.99);
    }

    #[test]
    fn vanilla_labeling_is_self_consistent() {
        let pts = flat_cloud(1500, 2);
        let (plane, mask) = vanilla_ransac(&pts, 100, 0.2, 3).unwrap();
        let direct = ransac::verify_distance(&plane, &pts, 0.2);
        assert_eq!(mask, direct);
    }

    #[test]
    fn lpr_fits_flat_cloud_in_all_slabs() {
        let pts = flat_cloud(3000, 3);
        let labeling = lpr_fit(&pts, &LprParams::default(), pts.len());
        let recall = labeling.ground_count() as f64 / pts.len() as f64;
        assert!(recall >= 0.99, "flat recall {recall}");
        let Outcome::FixedSlabs { planes, .. } = &labeling.outcome else { panic!() };
        assert!(planes.iter().all(|p| p.is_some()));
        for plane in planes.iter().flatten() {
            assert!(plane.tilt().to_degrees() < 1.0);
            assert!(plane.offset.abs() < 0.05);
        }
    }

    #[test]
    fn lpr_empty_slab_is_skipped_without_harm() {
        // All points in x > 15: the first slab [-40, -13.3) is empty.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Point> = (0..1000)
            .map(|i| {
                pt(
                    rng.gen_range(15.0..39.0),
                    rng.gen_range(-30.0..30.0),
                    rng.gen_range(-0.02..0.02),
                    i as u32,
                )
            })
            .collect();
        let labeling = lpr_fit(&pts, &LprParams::default(), pts.len());
        let Outcome::FixedSlabs { planes, .. } = &labeling.outcome else { panic!() };
        assert!(planes[0].is_none());
        assert!(planes[2].is_some());
        let recall = labeling.ground_count() as f64 / pts.len() as f64;
        assert!(recall > 0.95, "recall {recall}");
    }

    #[test]
    fn slab_assignment_is_clamped_and_disjoint() {
        let params = LprParams::default();
        assert_eq!(slab_of(-41.0, &params), 0);
        assert_eq!(slab_of(-40.0, &params), 0);
        assert_eq!(slab_of(0.0, &params), 1);
        assert_eq!(slab_of(39.9, &params), 2);
        assert_eq!(slab_of(41.0, &params), 2);
    }
}
