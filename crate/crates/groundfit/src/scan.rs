//! Point-cloud data model, CSV ingestion, radius cropping, horizontal grid
//! downsampling, and organization into a beam×azimuth range scan.
//!
//! The cloud CSV format is one point per line, `x,y,z,beam,azimuth_step`,
//! optionally followed by an integer ground-truth label (`1` ground, `0`
//! not). A header line is allowed and detected by a non-numeric first
//! field. Both LF and CRLF line endings are accepted.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::geom::Vec3;

/// One lidar return in the vehicle frame (z up, x forward).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Beam (ring) row index, 0-based from the lowest elevation.
    pub beam: u16,
    /// Azimuth column index along the scan direction.
    pub azimuth_step: u16,
    /// Stable index into the originally loaded cloud.
    pub point_id: u32,
}

impl Point {
    pub fn pos(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    /// Squared horizontal distance from the vehicle origin.
    pub fn horizontal_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Squared 3D range from the vehicle origin.
    pub fn range_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }
}

/// A cloud plus optional per-point ground-truth labels parallel to `points`.
#[derive(Debug, Clone, Default)]
pub struct LabeledCloud {
    pub points: Vec<Point>,
    pub labels: Option<Vec<bool>>,
}

/// Horizontal square centered on `(center_x, center_y)` bounding a cloud.
#[derive(Debug, Clone, Copy)]
pub struct CloudBounds {
    pub center_x: f64,
    pub center_y: f64,
    pub half_extent: f64,
}

impl CloudBounds {
    pub fn new(center_x: f64, center_y: f64, half_extent: f64) -> Self {
        assert!(half_extent > 0.0, "half_extent must be positive");
        Self { center_x, center_y, half_extent }
    }

    /// Square of the given half extent centered on the origin.
    pub fn centered(half_extent: f64) -> Self {
        Self::new(0.0, 0.0, half_extent)
    }

    pub fn min_x(&self) -> f64 {
        self.center_x - self.half_extent
    }

    pub fn min_y(&self) -> f64 {
        self.center_y - self.half_extent
    }

    pub fn size(&self) -> f64 {
        2.0 * self.half_extent
    }

    /// Whether the horizontal position is inside the square (inclusive).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.center_x).abs() <= self.half_extent && (y - self.center_y).abs() <= self.half_extent
    }

    /// Bin of a horizontal position on a `bins`×`bins` grid laid over the
    /// square. Cells are half-open `[lo, hi)` with the last bin closed, and
    /// out-of-bounds positions clamp to edge bins. Returns
    /// `(column from x, row from y)`.
    pub fn bin_of(&self, x: f64, y: f64, bins: usize) -> (usize, usize) {
        debug_assert!(bins >= 1);
        let size = self.size() / bins as f64;
        let idx = |v: f64, lo: f64| -> usize {
            let i = ((v - lo) / size).floor();
            if i < 0.0 {
                0
            } else if i >= bins as f64 {
                bins - 1
            } else {
                i as usize
            }
        };
        (idx(x, self.min_x()), idx(y, self.min_y()))
    }
}

/// Organized beams×azimuth-steps view of a cloud. Cells hold indexes into
/// the slice the scan was built from; a cell is `None` when no return
/// landed there.
#[derive(Debug, Clone)]
pub struct RangeScan {
    rows: usize,
    cols: usize,
    cells: Vec<Option<u32>>,
}

impl RangeScan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Index into the source slice of the point at `(row, col)`, if any.
    pub fn cell(&self, row: usize, col: usize) -> Option<usize> {
        self.cells[row * self.cols + col].map(|i| i as usize)
    }

    /// Number of non-empty cells.
    pub fn filled(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: beam {beam} out of range (rows = {rows})")]
    BeamOutOfRange { line: usize, beam: u32, rows: usize },
    #[error("line {line}: azimuth step {step} out of range (cols = {cols})")]
    AzimuthOutOfRange { line: usize, step: u32, cols: usize },
    #[error("line {line}: non-finite coordinate")]
    NonFinite { line: usize },
}

/// Load a cloud CSV. `rows` and `cols` bound the beam and azimuth indexes;
/// `point_id` is assigned as the 0-based data-row index.
pub fn load_cloud(path: &Path, rows: usize, cols: usize) -> Result<LabeledCloud, ScanError> {
    let file = File::open(path).map_err(|source| ScanError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_cloud(BufReader::new(file), path, rows, cols)
}

fn read_cloud<R: BufRead>(
    reader: R,
    path: &Path,
    rows: usize,
    cols: usize,
) -> Result<LabeledCloud, ScanError> {
    let mut points: Vec<Point> = Vec::new();
    let mut labels: Vec<bool> = Vec::new();
    // Some(true) once the first data row fixes whether a label column exists.
    let mut has_labels: Option<bool> = None;
    let mut seen_data = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| ScanError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_data && fields[0].parse::<f64>().is_err() {
            // Header row.
            seen_data = true;
            continue;
        }
        seen_data = true;

        if fields.len() != 5 && fields.len() != 6 {
            return Err(ScanError::Parse {
                line: line_no,
                msg: format!("expected 5 or 6 fields, got {}", fields.len()),
            });
        }
        let labeled = fields.len() == 6;
        match has_labels {
            None => has_labels = Some(labeled),
            Some(expected) if expected != labeled => {
                return Err(ScanError::Parse {
                    line: line_no,
                    msg: "inconsistent label column".to_string(),
                });
            }
            _ => {}
        }

        let coord = |i: usize, name: &str| -> Result<f64, ScanError> {
            fields[i].parse::<f64>().map_err(|_| ScanError::Parse {
                line: line_no,
                msg: format!("invalid {name} value {:?}", fields[i]),
            })
        };
        let x = coord(0, "x")?;
        let y = coord(1, "y")?;
        let z = coord(2, "z")?;
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(ScanError::NonFinite { line: line_no });
        }

        let beam: u32 = fields[3].parse().map_err(|_| ScanError::Parse {
            line: line_no,
            msg: format!("invalid beam index {:?}", fields[3]),
        })?;
        if beam as usize >= rows {
            return Err(ScanError::BeamOutOfRange { line: line_no, beam, rows });
        }
        let step: u32 = fields[4].parse().map_err(|_| ScanError::Parse {
            line: line_no,
            msg: format!("invalid azimuth step {:?}", fields[4]),
        })?;
        if step as usize >= cols {
            return Err(ScanError::AzimuthOutOfRange { line: line_no, step, cols });
        }

        if labeled {
            let label = match fields[5] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(ScanError::Parse {
                        line: line_no,
                        msg: format!("invalid label {other:?} (expected 0 or 1)"),
                    })
                }
            };
            labels.push(label);
        }

        points.push(Point {
            x,
            y,
            z,
            beam: beam as u16,
            azimuth_step: step as u16,
            point_id: points.len() as u32,
        });
    }

    let labels = if has_labels == Some(true) { Some(labels) } else { None };
    Ok(LabeledCloud { points, labels })
}

/// Write a cloud CSV (with header). Floats use the shortest representation
/// that round-trips, so a written cloud reloads bit-exactly.
pub fn write_cloud<W: Write>(
    mut w: W,
    points: &[Point],
    labels: Option<&[bool]>,
) -> io::Result<()> {
    if labels.is_some() {
        writeln!(w, "x,y,z,beam,azimuth_step,label")?;
    } else {
        writeln!(w, "x,y,z,beam,azimuth_step")?;
    }
    for (i, p) in points.iter().enumerate() {
        match labels {
            Some(l) => writeln!(
                w,
                "{},{},{},{},{},{}",
                p.x,
                p.y,
                p.z,
                p.beam,
                p.azimuth_step,
                u8::from(l[i])
            )?,
            None => writeln!(w, "{},{},{},{},{}", p.x, p.y, p.z, p.beam, p.azimuth_step)?,
        }
    }
    Ok(())
}

/// Keep points whose horizontal distance from the origin is at most
/// `radius` (boundary inclusive). Order and `point_id` are preserved.
pub fn crop_radius(points: &[Point], radius: f64) -> Vec<Point> {
    assert!(radius > 0.0, "radius must be positive");
    let r_sq = radius * radius;
    points.iter().filter(|p| p.horizontal_sq() <= r_sq).copied().collect()
}

/// Keep at most one point per horizontal grid cell of side `cell`; the
/// first point encountered in input order wins. Order is preserved.
pub fn grid_downsample(points: &[Point], cell: f64) -> Vec<Point> {
    assert!(cell > 0.0, "cell must be positive");
    let mut seen: HashSet<(i64, i64)> = HashSet::with_capacity(points.len());
    points
        .iter()
        .filter(|p| {
            let key = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
            seen.insert(key)
        })
        .copied()
        .collect()
}

/// Arrange points into a `rows`×`cols` range scan by `(beam, azimuth_step)`.
/// When two points land in one cell, the nearer-range return is kept.
pub fn organize(points: &[Point], rows: usize, cols: usize) -> RangeScan {
    let mut cells: Vec<Option<u32>> = vec![None; rows * cols];
    for (i, p) in points.iter().enumerate() {
        assert!((p.beam as usize) < rows, "beam index out of range");
        assert!((p.azimuth_step as usize) < cols, "azimuth step out of range");
        let idx = p.beam as usize * cols + p.azimuth_step as usize;
        match cells[idx] {
            None => cells[idx] = Some(i as u32),
            Some(prev) => {
                if p.range_sq() < points[prev as usize].range_sq() {
                    cells[idx] = Some(i as u32);
                }
            }
        }
    }
    RangeScan { rows, cols, cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<LabeledCloud, ScanError> {
        read_cloud(Cursor::new(text), Path::new("test.csv"), 16, 1800)
    }

    fn pt(x: f64, y: f64, z: f64, beam: u16, step: u16, id: u32) -> Point {
        Point { x, y, z, beam, azimuth_step: step, point_id: id }
    }

    #[test]
    fn load_single_row() {
        let cloud = parse("1.0,2.0,0.0,3,100\n").unwrap();
        assert_eq!(cloud.points.len(), 1);
        let p = cloud.points[0];
        assert_eq!((p.x, p.y, p.z), (1.0, 2.0, 0.0));
        assert_eq!(p.beam, 3);
        assert_eq!(p.azimuth_step, 100);
        assert_eq!(p.point_id, 0);
        assert!(cloud.labels.is_none());
    }

    #[test]
    fn load_empty_file() {
        let cloud = parse("").unwrap();
        assert!(cloud.points.is_empty());
    }

    #[test]
    fn load_rejects_beam_out_of_range() {
        let err = parse("1.0,2.0,0.0,16,100\n").unwrap_err();
        match err {
            ScanError::BeamOutOfRange { beam: 16, rows: 16, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_rejects_non_finite() {
        assert!(matches!(parse("NaN,0,0,0,0\n"), Err(ScanError::NonFinite { line: 1 })));
        assert!(matches!(parse("0,inf,0,0,0\n"), Err(ScanError::NonFinite { line: 1 })));
    }

    #[test]
    fn load_skips_header_and_handles_crlf_and_labels() {
        let cloud = parse("x,y,z,beam,azimuth_step,label\r\n1,2,3,0,0,1\r\n4,5,6,1,2,0\r\n").unwrap();
        assert_eq!(cloud.points.len(), 2);
        assert_eq!(cloud.labels, Some(vec![true, false]));
        assert_eq!(cloud.points[1].point_id, 1);
    }

    #[test]
    fn load_parse_error_carries_line_number() {
        let err = parse("1,2,3,0,0\nbogus,2,3,0,0\n").unwrap_err();
        match err {
            ScanError::Parse { line: 2, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn crop_boundary_inclusive() {
        let pts = vec![pt(40.0, 0.0, 0.0, 0, 0, 0), pt(41.0, 0.0, 0.0, 0, 1, 1)];
        let kept = crop_radius(&pts, 40.0);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].point_id, 0);
    }

    #[test]
    fn crop_identity_when_all_inside() {
        let pts = vec![pt(1.0, 2.0, 0.0, 0, 0, 0), pt(-3.0, 0.5, 1.0, 1, 5, 1)];
        assert_eq!(crop_radius(&pts, 40.0), pts);
    }

    #[test]
    fn downsample_same_cell_keeps_first() {
        let pts = vec![pt(0.01, 0.01, 1.0, 0, 0, 0), pt(0.05, 0.05, 2.0, 0, 1, 1)];
        let kept = grid_downsample(&pts, 0.1);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].point_id, 0);
    }

    #[test]
    fn downsample_distinct_cells_keep_all() {
        let pts = vec![
            pt(0.0, 0.0, 0.0, 0, 0, 0),
            pt(1.0, 0.0, 0.0, 0, 1, 1),
            pt(0.0, 1.0, 0.0, 0, 2, 2),
        ];
        assert_eq!(grid_downsample(&pts, 0.1).len(), 3);
    }

    #[test]
    fn organize_places_points_and_resolves_collisions() {
        let pts = vec![
            pt(5.0, 0.0, 0.0, 2, 10, 0),
            pt(1.0, 1.0, 0.0, 0, 0, 1),
            pt(7.0, 0.0, 0.0, 2, 10, 2), // collides with the 5 m return
        ];
        let scan = organize(&pts, 16, 1800);
        assert_eq!(scan.filled(), 2);
        assert_eq!(scan.cell(2, 10), Some(0), "nearer range wins the cell");
        assert_eq!(scan.cell(0, 0), Some(1));
    }

    #[test]
    fn organize_empty() {
        let scan = organize(&[], 4, 8);
        assert_eq!(scan.filled(), 0);
    }

    #[test]
    fn bin_of_center_and_edges() {
        let bounds = CloudBounds::centered(40.0);
        assert_eq!(bounds.bin_of(0.0, 0.0, 80), (40, 40));
        assert_eq!(bounds.bin_of(-40.0, -40.0, 80), (0, 0));
        // The max edge belongs to the last bin; beyond it clamps.
        assert_eq!(bounds.bin_of(40.0, 40.0, 80), (79, 79));
        assert_eq!(bounds.bin_of(500.0, -500.0, 80), (79, 0));
    }

    #[test]
    fn cloud_csv_roundtrip_is_exact() {
        let pts = vec![pt(1.25, -0.333333333333, 17.0, 3, 1234, 0), pt(0.1, 0.2, 0.3, 15, 0, 1)];
        let mut buf = Vec::new();
        write_cloud(&mut buf, &pts, Some(&[true, false])).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cloud = parse(&text).unwrap();
        assert_eq!(cloud.points, pts);
        assert_eq!(cloud.labels, Some(vec![true, false]));
    }

    proptest! {
        #[test]
        fn crop_then_downsample_is_subset(
            coords in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0, -2.0f64..5.0), 0..200),
            radius in 1.0f64..45.0,
            cell in 0.05f64..2.0,
        ) {
            let pts: Vec<Point> = coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y, z))| pt(x, y, z, (i % 16) as u16, (i % 1800) as u16, i as u32))
                .collect();
            let out = grid_downsample(&crop_radius(&pts, radius), cell);
            for q in &out {
                prop_assert!(pts.iter().any(|p| p == q), "output point not in input");
            }
        }

        #[test]
        fn downsample_is_idempotent(
            coords in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 0..200),
            cell in 0.05f64..2.0,
        ) {
            let pts: Vec<Point> = coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| pt(x, y, 0.0, 0, 0, i as u32))
                .collect();
            let once = grid_downsample(&pts, cell);
            let twice = grid_downsample(&once, cell);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn organize_is_lossless_up_to_collisions(
            cells in proptest::collection::vec((0u16..8, 0u16..16, 1.0f64..30.0), 0..100),
        ) {
            let pts: Vec<Point> = cells
                .iter()
                .enumerate()
                .map(|(i, &(beam, step, r))| pt(r, 0.3 * r, 0.0, beam, step, i as u32))
                .collect();
            let scan = organize(&pts, 8, 16);
            let mut unique = HashSet::new();
            for p in &pts {
                unique.insert((p.beam, p.azimuth_step));
            }
            prop_assert_eq!(scan.filled(), unique.len());
        }
    }
}
