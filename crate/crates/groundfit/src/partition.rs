//! Per-hypothesis inlier binning, integral images, rectangle sums, the
//! cross-partition search, and the end-to-end ground detection pipeline.
//!
//! The search places one vertical and one horizontal cut on the bin grid,
//! splitting the bounding square into four disjoint quadrants, and picks
//! the cut plus one plane per quadrant maximizing the total inlier count.
//! Per-quadrant counts are O(1) rectangle sums over per-hypothesis integral
//! images, so the whole search costs O(B²·M) after an O((N + B²)·M)
//! precomputation.

use thiserror::Error;

use crate::config::DetectorConfig;
use crate::ransac::{
    self, tangent_inlier, InlierMask, PlaneHypothesis, RansacError, VerifyParams,
};
use crate::scan::{crop_radius, grid_downsample, organize, CloudBounds, Point};
use crate::tangent::{estimate_tangents, TangentField};

/// Per-bin inlier counts of one hypothesis over the bounding square.
#[derive(Debug, Clone)]
pub struct BinGrid {
    bins: usize,
    bounds: CloudBounds,
    counts: Vec<u32>,
}

impl BinGrid {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bounds(&self) -> CloudBounds {
        self.bounds
    }

    /// Count in bin `(c, r)` (column from x, row from y).
    pub fn count(&self, c: usize, r: usize) -> u32 {
        self.counts[r * self.bins + c]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&v| v as u64).sum()
    }
}

/// Inclusive 2D prefix sums of a `BinGrid`.
#[derive(Debug, Clone)]
pub struct InlierIntegral {
    bins: usize,
    sums: Vec<u32>,
}

impl InlierIntegral {
    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Prefix sum over bins `(c' <= c, r' <= r)`, inclusive.
    pub fn at(&self, c: usize, r: usize) -> u32 {
        self.sums[r * self.bins + c]
    }

    /// Sum over the whole grid.
    pub fn total(&self) -> u32 {
        self.sums[self.bins * self.bins - 1]
    }
}

/// Bin the masked points onto a `bins`×`bins` grid over `bounds`.
/// Out-of-bounds inliers clamp into the edge bins.
pub fn bin_inliers(
    points: &[Point],
    mask: &InlierMask,
    bounds: CloudBounds,
    bins: usize,
) -> BinGrid {
    assert!(bins >= 2, "need at least a 2x2 grid");
    assert_eq!(points.len(), mask.len(), "mask must align with points");
    let mut counts = vec![0u32; bins * bins];
    for (i, p) in points.iter().enumerate() {
        if !mask.get(i) {
            continue;
        }
        let (c, r) = bounds.bin_of(p.x, p.y, bins);
        counts[r * bins + c] += 1;
    }
    BinGrid { bins, bounds, counts }
}

/// Inclusive integral image of a bin grid.
pub fn integral_image(grid: &BinGrid) -> InlierIntegral {
    let b = grid.bins;
    let mut sums = vec![0u32; b * b];
    for r in 0..b {
        let mut row_sum = 0u32;
        for c in 0..b {
            row_sum += grid.counts[r * b + c];
            let above = if r > 0 { sums[(r - 1) * b + c] } else { 0 };
            sums[r * b + c] = row_sum + above;
        }
    }
    InlierIntegral { bins: b, sums }
}

/// Sum of bin counts over the inclusive rectangle `(c0, r0)..=(c1, r1)`.
pub fn rect_sum(integral: &InlierIntegral, c0: usize, r0: usize, c1: usize, r1: usize) -> u32 {
    let b = integral.bins;
    assert!(c0 <= c1 && c1 < b && r0 <= r1 && r1 < b, "invalid rectangle ordering");
    let br = integral.at(c1, r1);
    let left = if c0 > 0 { integral.at(c0 - 1, r1) } else { 0 };
    let top = if r0 > 0 { integral.at(c1, r0 - 1) } else { 0 };
    let corner = if c0 > 0 && r0 > 0 { integral.at(c0 - 1, r0 - 1) } else { 0 };
    // (br - left) and (top - corner) are both full-width column sums, so
    // each difference stays non-negative in unsigned arithmetic.
    (br - left) - (top - corner)
}

/// Quadrant order for cross partitions: indexes into `plane_index` and
/// `quadrant_inliers` are NW, NE, SW, SE (low-x/low-y first).
pub const QUADRANT_NAMES: [&str; 4] = ["nw", "ne", "sw", "se"];

/// Winning cross partition: cut position, one hypothesis per quadrant, and
/// the per-quadrant / total inlier counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionResult {
    /// Cut position in bin coordinates `(c, r)`: the vertical cut runs
    /// between columns `c-1` and `c`, the horizontal between rows `r-1`
    /// and `r`.
    pub cross_center: (usize, usize),
    /// Hypothesis index per quadrant (NW, NE, SW, SE).
    pub plane_index: [usize; 4],
    pub quadrant_inliers: [u32; 4],
    pub best_sum: u32,
}

impl PartitionResult {
    /// Cut position in meters over the given bounds.
    pub fn center_meters(&self, bounds: CloudBounds, bins: usize) -> (f64, f64) {
        let bin = bounds.size() / bins as f64;
        (
            bounds.min_x() + self.cross_center.0 as f64 * bin,
            bounds.min_y() + self.cross_center.1 as f64 * bin,
        )
    }
}

/// Quadrant (in NW, NE, SW, SE order) of a bin under a cross cut.
fn quadrant_of(c: usize, r: usize, cut: (usize, usize)) -> usize {
    match (c >= cut.0, r >= cut.1) {
        (false, false) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (true, true) => 3,
    }
}

/// Search every cross position (cuts on interior bin boundaries, so all
/// four quadrants are non-empty) and pick per-quadrant argmax hypotheses.
/// A position is feasible when every quadrant keeps at least `min_inliers`;
/// among feasible positions the largest total wins. Ties prefer the
/// smallest `(r, c)` and then the smallest hypothesis indexes. Returns
/// `None` when no position is feasible.
pub fn cross_search(
    integrals: &[InlierIntegral],
    min_inliers: u32,
    bins: usize,
) -> Option<PartitionResult> {
    assert!(!integrals.is_empty(), "need at least one hypothesis");
    assert!(bins >= 2);
    debug_assert!(integrals.iter().all(|i| i.bins() == bins));

    let centers = (bins - 1) * (bins - 1);
    let mut best_count = vec![0u32; centers * 4];
    let mut best_m = vec![0u32; centers * 4];

    // Hypothesis-major pass keeps one integral image hot while its quadrant
    // sums stream through the per-center running argmax.
    for (m, integral) in integrals.iter().enumerate() {
        let total = integral.total();
        for r in 1..bins {
            let row_right = integral.at(bins - 1, r - 1);
            for c in 1..bins {
                let nw = integral.at(c - 1, r - 1);
                let ne = row_right - nw;
                let sw = integral.at(c - 1, bins - 1) - nw;
                let se = total - nw - ne - sw;
                let idx = ((r - 1) * (bins - 1) + (c - 1)) * 4;
                let quads = [nw, ne, sw, se];
                for (s, &q) in quads.iter().enumerate() {
                    // Strict > keeps the lowest hypothesis index on ties.
                    if q > best_count[idx + s] {
                        best_count[idx + s] = q;
                        best_m[idx + s] = m as u32;
                    }
                }
            }
        }
    }

    let mut best: Option<PartitionResult> = None;
    for r in 1..bins {
        for c in 1..bins {
            let idx = ((r - 1) * (bins - 1) + (c - 1)) * 4;
            let counts = [
                best_count[idx],
                best_count[idx + 1],
                best_count[idx + 2],
                best_count[idx + 3],
            ];
            if counts.iter().any(|&q| q < min_inliers) {
                continue;
            }
            let sum: u32 = counts.iter().sum();
            // Strict > keeps the smallest (r, c) on ties; per-quadrant
            // indexes are already tie-broken to the smallest m.
            if best.map_or(true, |b| sum > b.best_sum) {
                best = Some(PartitionResult {
                    cross_center: (c, r),
                    plane_index: [
                        best_m[idx] as usize,
                        best_m[idx + 1] as usize,
                        best_m[idx + 2] as usize,
                        best_m[idx + 3] as usize,
                    ],
                    quadrant_inliers: counts,
                    best_sum: sum,
                });
            }
        }
    }
    best
}

/// How a labeling was produced; carries what the sidecar needs to report.
#[derive(Debug, Clone)]
pub enum Outcome {
    /// Cross partition with one plane per quadrant.
    CrossPartition {
        result: PartitionResult,
        planes: [PlaneHypothesis; 4],
        bounds: CloudBounds,
        bins: usize,
    },
    /// One plane over the whole cloud. `fallback` is set when this stands
    /// in for an infeasible partition.
    SinglePlane { plane: PlaneHypothesis, fallback: bool },
    /// One plane per fixed longitudinal slab (`None` = slab skipped).
    FixedSlabs { planes: Vec<Option<PlaneHypothesis>>, extent: f64 },
}

/// Final per-point ground labeling, indexed by `point_id`.
#[derive(Debug, Clone)]
pub struct GroundLabeling {
    pub ground: Vec<bool>,
    pub outcome: Outcome,
}

impl GroundLabeling {
    pub fn ground_count(&self) -> usize {
        self.ground.iter().filter(|&&g| g).count()
    }
}

/// Label each point against the plane of the quadrant its bin falls in.
/// Quadrants tile the grid, so every point is tested against exactly one
/// plane; the test is the same distance + tangent verification used during
/// the search.
pub fn label_ground(
    points: &[Point],
    tangents: &TangentField,
    hypotheses: &[PlaneHypothesis],
    result: &PartitionResult,
    bounds: CloudBounds,
    bins: usize,
    params: &VerifyParams,
    id_space: usize,
) -> GroundLabeling {
    let sin_delta = params.delta.sin();
    let mut ground = vec![false; id_space];
    for p in points {
        let (c, r) = bounds.bin_of(p.x, p.y, bins);
        let quadrant = quadrant_of(c, r, result.cross_center);
        let plane = &hypotheses[result.plane_index[quadrant]];
        if tangent_inlier(plane, p, tangents, params.epsilon, sin_delta) {
            ground[p.point_id as usize] = true;
        }
    }
    let planes = [
        hypotheses[result.plane_index[0]],
        hypotheses[result.plane_index[1]],
        hypotheses[result.plane_index[2]],
        hypotheses[result.plane_index[3]],
    ];
    GroundLabeling {
        ground,
        outcome: Outcome::CrossPartition { result: *result, planes, bounds, bins },
    }
}

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("hypothesis sampling failed: {0}")]
    Sampling(#[from] RansacError),
}

/// End-to-end ground detection: organize the full cloud, estimate tangents,
/// crop and downsample, sample hypotheses, bin tangent-verified inliers per
/// hypothesis, search the cross partition, and label the cropped
/// full-resolution cloud. When no partition is feasible the best single
/// tangent-verified plane labels the cloud instead.
pub fn detect_ground(
    points: &[Point],
    config: &DetectorConfig,
) -> Result<GroundLabeling, DetectError> {
    let id_space = points.iter().map(|p| p.point_id as usize + 1).max().unwrap_or(0);

    // Tangents come from the full-resolution scan: differentiation needs the
    // dense azimuth neighbors that downsampling would strip.
    let scan = organize(points, config.scan_rows, config.scan_cols);
    let tangents = estimate_tangents(&scan, points, &config.tangent_params());

    let cropped = crop_radius(points, config.crop_radius);
    let fit_cloud = grid_downsample(&cropped, config.downsample);

    let hypotheses =
        ransac::sample_hypotheses(&fit_cloud, config.hypotheses, config.max_tilt(), config.seed)?;

    let params = config.verify_params();
    let bounds = config.bounds();
    let bins = config.grid_size;

    let mut integrals = Vec::with_capacity(hypotheses.len());
    let mut masks = Vec::with_capacity(hypotheses.len());
    for plane in &hypotheses {
        let mask = ransac::verify_tangent(plane, &fit_cloud, &tangents, &params);
        let grid = bin_inliers(&fit_cloud, &mask, bounds, bins);
        integrals.push(integral_image(&grid));
        masks.push(mask);
    }

    match cross_search(&integrals, config.min_quadrant_inliers, bins) {
        Some(result) => Ok(label_ground(
            &cropped, &tangents, &hypotheses, &result, bounds, bins, &params, id_space,
        )),
        None => {
            // No feasible cross: fall back to the best single plane among
            // the hypotheses already verified.
            let best = masks
                .iter()
                .enumerate()
                .max_by(|(ia, a), (ib, b)| a.count().cmp(&b.count()).then(ib.cmp(ia)))
                .map(|(i, _)| i)
                .expect("at least one hypothesis");
            let plane = hypotheses[best];
            let sin_delta = params.delta.sin();
            let mut ground = vec![false; id_space];
            for p in &cropped {
                if tangent_inlier(&plane, p, &tangents, params.epsilon, sin_delta) {
                    ground[p.point_id as usize] = true;
                }
            }
            Ok(GroundLabeling { ground, outcome: Outcome::SinglePlane { plane, fallback: true } })
        }
    }
}
