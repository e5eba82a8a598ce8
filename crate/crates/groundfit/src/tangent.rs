//! Per-point tangent estimation by numerical differentiation along scan
//! rows.
//!
//! Each beam's returns trace a curve on whatever surface it sweeps; along
//! the scan direction the azimuth step is small, so the chord to the
//! nearest row neighbors approximates the curve tangent well. No
//! cross-beam differences are taken: beams are far apart in elevation and
//! a local plane fit across them is not reliable on sparse lidars.

use crate::geom::Vec3;
use crate::scan::{Point, RangeScan};

/// Neighbor window and discontinuity gate for tangent estimation.
#[derive(Debug, Clone, Copy)]
pub struct TangentParams {
    /// How many columns away a row neighbor may be (wrapping at the
    /// azimuth seam).
    pub max_gap: usize,
    /// Reject a neighbor farther than this from the center point; a long
    /// chord means the row jumped across a depth discontinuity.
    pub max_chord: f64,
}

impl Default for TangentParams {
    fn default() -> Self {
        Self { max_gap: 5, max_chord: 1.0 }
    }
}

/// Unit tangents indexed by `point_id`; a point may have none.
#[derive(Debug, Clone)]
pub struct TangentField {
    tangents: Vec<Option<Vec3>>,
}

impl TangentField {
    /// Field over the id space `0..capacity` with no tangents set.
    pub fn empty(capacity: usize) -> Self {
        Self { tangents: vec![None; capacity] }
    }

    pub fn get(&self, point_id: u32) -> Option<Vec3> {
        self.tangents.get(point_id as usize).copied().flatten()
    }

    pub fn set(&mut self, point_id: u32, tangent: Vec3) {
        self.tangents[point_id as usize] = Some(tangent);
    }

    /// Number of points that have a tangent.
    pub fn count(&self) -> usize {
        self.tangents.iter().filter(|t| t.is_some()).count()
    }

    /// Size of the id space the field covers.
    pub fn id_capacity(&self) -> usize {
        self.tangents.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Vec3)> + '_ {
        self.tangents
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|v| (i as u32, v)))
    }

    /// Same field with every tangent negated.
    pub fn flipped(&self) -> Self {
        Self { tangents: self.tangents.iter().map(|t| t.map(|v| -v)).collect() }
    }
}

/// Estimate a unit tangent at every organized point that has a usable row
/// neighbor. Central difference across the nearest valid left and right
/// neighbors; one-sided difference when only one side exists; nothing when
/// isolated. The result is keyed by `point_id`.
pub fn estimate_tangents(
    scan: &RangeScan,
    points: &[Point],
    params: &TangentParams,
) -> TangentField {
    let capacity = points.iter().map(|p| p.point_id as usize + 1).max().unwrap_or(0);
    let mut field = TangentField::empty(capacity);
    let cols = scan.cols();
    if cols < 2 {
        return field;
    }
    // A window larger than the row would revisit cells after wrapping.
    let max_gap = params.max_gap.min(cols - 1);

    for row in 0..scan.rows() {
        for col in 0..cols {
            let Some(center_idx) = scan.cell(row, col) else { continue };
            let center = points[center_idx].pos();

            let neighbor = |dir_back: bool| -> Option<usize> {
                for k in 1..=max_gap {
                    let c = if dir_back {
                        (col + cols - k) % cols
                    } else {
                        (col + k) % cols
                    };
                    if let Some(idx) = scan.cell(row, c) {
                        let p = points[idx].pos();
                        if (p - center).norm() <= params.max_chord {
                            return Some(idx);
                        }
                        return None; // discontinuity: do not look past it
                    }
                }
                None
            };

            let left = neighbor(true);
            let right = neighbor(false);
            let diff = match (left, right) {
                (Some(l), Some(r)) if l != r => points[r].pos() - points[l].pos(),
                (Some(l), _) => center - points[l].pos(),
                (_, Some(r)) => points[r].pos() - center,
                (None, None) => continue,
            };
            if let Some(t) = diff.normalized() {
                field.set(points[center_idx].point_id, t);
            }
        }
    }
    field
}
