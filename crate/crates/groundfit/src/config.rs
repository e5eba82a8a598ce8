//! Detector configuration: built-in defaults, flat key=value config files,
//! and the effective-config echo used for reproducibility.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::ransac::VerifyParams;
use crate::scan::CloudBounds;
use crate::tangent::TangentParams;

/// Detection method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Tangent-verified RANSAC with cross-partitioned disjoint planes.
    Proposed,
    /// Single-plane RANSAC with distance-only verification.
    Vanilla,
    /// Fixed longitudinal partition seeded from the lowest points.
    Lpr,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Proposed, Method::Vanilla, Method::Lpr];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Vanilla => "vanilla",
            Method::Lpr => "lpr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "vanilla" => Ok(Method::Vanilla),
            "lpr" => Ok(Method::Lpr),
            other => Err(format!("unknown method {other:?} (expected proposed, vanilla or lpr)")),
        }
    }
}

/// All tunables for the detection pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Point-plane inlier distance threshold, meters.
    pub epsilon: f64,
    /// Tangent-perpendicularity threshold, degrees.
    pub delta_deg: f64,
    /// Number of RANSAC plane hypotheses.
    pub hypotheses: usize,
    /// Bins per side of the square binning grid.
    pub grid_size: usize,
    /// Minimum inliers a partition quadrant must keep.
    pub min_quadrant_inliers: u32,
    /// Horizontal crop radius around the sensor, meters.
    pub crop_radius: f64,
    /// Horizontal downsampling cell, meters.
    pub downsample: f64,
    /// Hypothesis tilt gate from horizontal, degrees; `None` disables.
    pub max_tilt_deg: Option<f64>,
    /// Tangent neighbor window, columns.
    pub max_gap: usize,
    /// Tangent discontinuity chord gate, meters.
    pub max_chord: f64,
    /// Range-scan rows (beams).
    pub scan_rows: usize,
    /// Range-scan columns (azimuth steps).
    pub scan_cols: usize,
    /// RNG seed for hypothesis sampling.
    pub seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            delta_deg: 10.0,
            hypotheses: 200,
            grid_size: 80,
            min_quadrant_inliers: 50,
            crop_radius: 40.0,
            downsample: 0.1,
            max_tilt_deg: Some(45.0),
            max_gap: 5,
            max_chord: 1.0,
            scan_rows: 16,
            scan_cols: 1800,
            seed: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl DetectorConfig {
    pub fn verify_params(&self) -> VerifyParams {
        VerifyParams { epsilon: self.epsilon, delta: self.delta_deg.to_radians() }
    }

    pub fn tangent_params(&self) -> TangentParams {
        TangentParams { max_gap: self.max_gap, max_chord: self.max_chord }
    }

    pub fn bounds(&self) -> CloudBounds {
        CloudBounds::centered(self.crop_radius)
    }

    pub fn max_tilt(&self) -> Option<f64> {
        self.max_tilt_deg.map(f64::to_radians)
    }

    /// Merge keys from a flat `key=value` config file over this config.
    /// Keys mirror the CLI flag names; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: line_no,
                    msg: format!("expected key=value, got {raw:?}"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            self.apply_key(key, value).map_err(|msg| ConfigError::Parse { line: line_no, msg })?;
        }
        Ok(())
    }

    fn apply_key(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value.parse().map_err(|_| format!("invalid value {value:?} for {key}"))
        }
        match key {
            "epsilon" => self.epsilon = num(key, value)?,
            "delta-deg" => self.delta_deg = num(key, value)?,
            "hypotheses" => self.hypotheses = num(key, value)?,
            "grid-size" => self.grid_size = num(key, value)?,
            "min-quadrant-inliers" => self.min_quadrant_inliers = num(key, value)?,
            "crop-radius" => self.crop_radius = num(key, value)?,
            "downsample" => self.downsample = num(key, value)?,
            "max-tilt-deg" => {
                self.max_tilt_deg = if value == "off" { None } else { Some(num(key, value)?) }
            }
            "max-gap" => self.max_gap = num(key, value)?,
            "max-chord" => self.max_chord = num(key, value)?,
            "scan-rows" => self.scan_rows = num(key, value)?,
            "scan-cols" => self.scan_cols = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// Deterministic `key=value` listing of the effective configuration.
    pub fn echo(&self) -> String {
        let tilt = match self.max_tilt_deg {
            Some(v) => v.to_string(),
            None => "off".to_string(),
        };
        format!(
            "epsilon={}\ndelta-deg={}\nhypotheses={}\ngrid-size={}\nmin-quadrant-inliers={}\ncrop-radius={}\ndownsample={}\nmax-tilt-deg={}\nmax-gap={}\nmax-chord={}\nscan-rows={}\nscan-cols={}\nseed={}",
            self.epsilon,
            self.delta_deg,
            self.hypotheses,
            self.grid_size,
            self.min_quadrant_inliers,
            self.crop_radius,
            self.downsample,
            tilt,
            self.max_gap,
            self.max_chord,
            self.scan_rows,
            self.scan_cols,
            self.seed,
        )
    }

    /// Stable FNV-1a hash of the effective configuration, hex-encoded.
    pub fn content_hash(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for b in self.echo().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
        format!("{h:016x}")
    }
}
