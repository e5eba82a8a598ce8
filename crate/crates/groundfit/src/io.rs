//! File formats for detection outputs: the labeling CSV, the sidecar
//! describing how a labeling was produced, and the tangent debug dump.
//!
//! Everything written here is deterministic for identical inputs, so two
//! runs with the same seed produce byte-identical files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::config::{DetectorConfig, Method};
use crate::partition::{GroundLabeling, Outcome, QUADRANT_NAMES};
use crate::ransac::PlaneHypothesis;
use crate::tangent::TangentField;

#[derive(Debug, Error)]
pub enum LabelingError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Write `point_id,ground` rows (header included).
pub fn write_labeling<W: Write>(mut w: W, labeling: &GroundLabeling) -> io::Result<()> {
    writeln!(w, "point_id,ground")?;
    for (id, &g) in labeling.ground.iter().enumerate() {
        writeln!(w, "{},{}", id, u8::from(g))?;
    }
    Ok(())
}

pub fn write_labeling_file(path: &Path, labeling: &GroundLabeling) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_labeling(&mut w, labeling)?;
    w.flush()
}

/// Read a labeling CSV back as `(point_id, ground)` pairs in file order.
pub fn read_labeling(path: &Path) -> Result<Vec<(u32, bool)>, LabelingError> {
    let file = File::open(path).map_err(|source| LabelingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rows = Vec::new();
    let mut seen_data = false;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| LabelingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (Some(id), Some(flag), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(LabelingError::Parse {
                line: line_no,
                msg: "expected exactly 2 fields".to_string(),
            });
        };
        if !seen_data && id.parse::<u32>().is_err() {
            seen_data = true;
            continue; // header
        }
        seen_data = true;
        let id: u32 = id.parse().map_err(|_| LabelingError::Parse {
            line: line_no,
            msg: format!("invalid point id {id:?}"),
        })?;
        let flag = match flag {
            "0" => false,
            "1" => true,
            other => {
                return Err(LabelingError::Parse {
                    line: line_no,
                    msg: format!("invalid ground flag {other:?}"),
                })
            }
        };
        rows.push((id, flag));
    }
    Ok(rows)
}

fn plane_line(name: &str, plane: &PlaneHypothesis) -> String {
    format!(
        "plane_{}={},{},{},{}",
        name, plane.normal.x, plane.normal.y, plane.normal.z, plane.offset
    )
}

/// Write the structured text sidecar: method, effective config, and the
/// outcome (cut position, planes, per-quadrant counts).
pub fn write_sidecar<W: Write>(
    mut w: W,
    method: Method,
    config: &DetectorConfig,
    labeling: &GroundLabeling,
) -> io::Result<()> {
    writeln!(w, "method={method}")?;
    writeln!(w, "{}", config.echo())?;
    writeln!(w, "config-hash={}", config.content_hash())?;
    writeln!(w, "ground-points={}", labeling.ground_count())?;
    match &labeling.outcome {
        Outcome::CrossPartition { result, planes, bounds, bins } => {
            writeln!(w, "outcome=cross-partition")?;
            let (cx, cy) = result.center_meters(*bounds, *bins);
            writeln!(w, "cross-center-bins={},{}", result.cross_center.0, result.cross_center.1)?;
            writeln!(w, "cross-center-meters={cx},{cy}")?;
            for (s, name) in QUADRANT_NAMES.iter().enumerate() {
                writeln!(w, "{}", plane_line(name, &planes[s]))?;
            }
            writeln!(
                w,
                "quadrant-inliers={},{},{},{}",
                result.quadrant_inliers[0],
                result.quadrant_inliers[1],
                result.quadrant_inliers[2],
                result.quadrant_inliers[3]
            )?;
            writeln!(w, "best-sum={}", result.best_sum)?;
        }
        Outcome::SinglePlane { plane, fallback } => {
            if *fallback {
                writeln!(w, "outcome=single-plane-fallback")?;
            } else {
                writeln!(w, "outcome=single-plane")?;
            }
            writeln!(w, "{}", plane_line("global", plane))?;
        }
        Outcome::FixedSlabs { planes, extent } => {
            writeln!(w, "outcome=fixed-slabs")?;
            writeln!(w, "slab-extent={extent}")?;
            for (i, plane) in planes.iter().enumerate() {
                match plane {
                    Some(p) => writeln!(w, "{}", plane_line(&format!("slab{i}"), p))?,
                    None => writeln!(w, "plane_slab{i}=none")?,
                }
            }
        }
    }
    Ok(())
}

pub fn write_sidecar_file(
    path: &Path,
    method: Method,
    config: &DetectorConfig,
    labeling: &GroundLabeling,
) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sidecar(&mut w, method, config, labeling)?;
    w.flush()
}

/// Write a `point_id,tx,ty,tz` dump of every stored tangent.
pub fn write_tangents<W: Write>(mut w: W, field: &TangentField) -> io::Result<()> {
    writeln!(w, "point_id,tx,ty,tz")?;
    for (id, t) in field.iter() {
        writeln!(w, "{},{},{},{}", id, t.x, t.y, t.z)?;
    }
    Ok(())
}
