//! Synthetic spinning-lidar raycaster and the canonical test scenes.
//!
//! Scenes are collections of finite surfaces (planar patches, axis-aligned
//! boxes, vertical walls), each flagged as ground or not. The raycaster
//! shoots one ray per (beam, azimuth step), keeps the nearest hit within
//! range, and labels the return with the hit element's ground flag, so the
//! produced clouds carry exact ground truth.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;
use thiserror::Error;

use crate::geom::Vec3;
use crate::scan::{LabeledCloud, Point};

/// Spinning-lidar model: one ray per (beam, azimuth step).
#[derive(Debug, Clone)]
pub struct LidarConfig {
    /// Per-beam elevation angles in degrees, strictly increasing.
    pub beam_elevations_deg: Vec<f64>,
    /// Azimuth resolution in degrees per step.
    pub azimuth_resolution_deg: f64,
    /// Sensor height above the scene origin, meters.
    pub sensor_height: f64,
    /// Maximum return range, meters.
    pub max_range: f64,
    /// Std-dev of Gaussian range noise along the ray, meters; 0 disables.
    /// Samples are clamped to ±4σ.
    pub noise_sigma: f64,
}

impl Default for LidarConfig {
    /// 16-beam profile: elevations −15°..+15° in 2° steps, 0.2° azimuth.
    fn default() -> Self {
        Self {
            beam_elevations_deg: (0..16).map(|i| -15.0 + 2.0 * i as f64).collect(),
            azimuth_resolution_deg: 0.2,
            sensor_height: 1.8,
            max_range: 100.0,
            noise_sigma: 0.01,
        }
    }
}

impl LidarConfig {
    pub fn rows(&self) -> usize {
        self.beam_elevations_deg.len()
    }

    pub fn cols(&self) -> usize {
        (360.0 / self.azimuth_resolution_deg).round() as usize
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if self.azimuth_resolution_deg <= 0.0 {
            return Err(SceneError::Invalid("azimuth resolution must be positive".into()));
        }
        if self.beam_elevations_deg.is_empty() {
            return Err(SceneError::Invalid("at least one beam required".into()));
        }
        if self.beam_elevations_deg.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SceneError::Invalid("beam elevations must be strictly increasing".into()));
        }
        if self.noise_sigma < 0.0 {
            return Err(SceneError::Invalid("noise sigma must be non-negative".into()));
        }
        Ok(())
    }
}

/// A finite surface a ray can hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Plane `n·p + d = 0` (n.z > 0) restricted to a horizontal rectangle.
    PlanePatch {
        normal: Vec3,
        offset: f64,
        x_range: (f64, f64),
        y_range: (f64, f64),
    },
    /// Axis-aligned box.
    Cuboid { min: Vec3, max: Vec3 },
    /// Vertical rectangle over the ground segment `start`–`end`.
    Wall {
        start: (f64, f64),
        end: (f64, f64),
        z_range: (f64, f64),
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneElement {
    pub shape: Shape,
    pub is_ground: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub elements: Vec<SceneElement>,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scene file parse error: {0}")]
    Parse(String),
}

/// Max slope (from horizontal) a surface may have and still be labeled
/// ground, keeping ground-truth labels meaningful.
const MAX_GROUND_SLOPE_DEG: f64 = 30.0;

impl Scene {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.elements.is_empty() {
            return Err(SceneError::Invalid("scene has no elements".into()));
        }
        if !self.elements.iter().any(|e| e.is_ground) {
            return Err(SceneError::Invalid("scene has no ground element".into()));
        }
        let min_nz = (MAX_GROUND_SLOPE_DEG.to_radians()).cos() - 1e-9;
        for (i, e) in self.elements.iter().enumerate() {
            match e.shape {
                Shape::PlanePatch { normal, x_range, y_range, .. } => {
                    if normal.normalized().is_none() || normal.z <= 0.1 {
                        return Err(SceneError::Invalid(format!(
                            "element {i}: patch normal must point up (z > 0)"
                        )));
                    }
                    if x_range.0 >= x_range.1 || y_range.0 >= y_range.1 {
                        return Err(SceneError::Invalid(format!("element {i}: empty patch extent")));
                    }
                    let n = normal.normalized().unwrap();
                    if e.is_ground && n.z < min_nz {
                        return Err(SceneError::Invalid(format!(
                            "element {i}: ground slope exceeds {MAX_GROUND_SLOPE_DEG}°"
                        )));
                    }
                }
                Shape::Cuboid { min, max } => {
                    if min.x >= max.x || min.y >= max.y || min.z >= max.z {
                        return Err(SceneError::Invalid(format!("element {i}: empty box")));
                    }
                }
                Shape::Wall { start, end, z_range } => {
                    if start == end || z_range.0 >= z_range.1 {
                        return Err(SceneError::Invalid(format!("element {i}: empty wall")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Parse a scene from the TOML schema described in the project README.
    pub fn from_toml_str(text: &str) -> Result<Scene, SceneError> {
        let file: SceneFile = toml::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
        let scene = Scene {
            elements: file.element.into_iter().map(ElementSpec::into_element).collect(),
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Scene, SceneError> {
        let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scene::from_toml_str(&text)
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
struct SceneFile {
    element: Vec<ElementSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ElementSpec {
    GroundPlane {
        z: f64,
        x_range: [f64; 2],
        y_range: [f64; 2],
        #[serde(default = "default_true")]
        ground: bool,
    },
    Ramp {
        axis: RampAxis,
        range: [f64; 2],
        cross_range: [f64; 2],
        base_z: f64,
        grade_deg: f64,
        #[serde(default = "default_true")]
        ground: bool,
    },
    Box {
        min: [f64; 3],
        max: [f64; 3],
        #[serde(default)]
        ground: bool,
    },
    Wall {
        start: [f64; 2],
        end: [f64; 2],
        z_range: [f64; 2],
        #[serde(default)]
        ground: bool,
    },
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum RampAxis {
    X,
    Y,
}

impl ElementSpec {
    fn into_element(self) -> SceneElement {
        match self {
            ElementSpec::GroundPlane { z, x_range, y_range, ground } => SceneElement {
                shape: horizontal_patch(z, (x_range[0], x_range[1]), (y_range[0], y_range[1])),
                is_ground: ground,
            },
            ElementSpec::Ramp { axis, range, cross_range, base_z, grade_deg, ground } => {
                let (r, c) = ((range[0], range[1]), (cross_range[0], cross_range[1]));
                let shape = match axis {
                    RampAxis::X => ramp_x(r, c, base_z, grade_deg),
                    RampAxis::Y => ramp_y(r, c, base_z, grade_deg),
                };
                SceneElement { shape, is_ground: ground }
            }
            ElementSpec::Box { min, max, ground } => SceneElement {
                shape: Shape::Cuboid {
                    min: Vec3::new(min[0], min[1], min[2]),
                    max: Vec3::new(max[0], max[1], max[2]),
                },
                is_ground: ground,
            },
            ElementSpec::Wall { start, end, z_range, ground } => SceneElement {
                shape: Shape::Wall {
                    start: (start[0], start[1]),
                    end: (end[0], end[1]),
                    z_range: (z_range[0], z_range[1]),
                },
                is_ground: ground,
            },
        }
    }
}

/// Horizontal plane z = `z` over a rectangle.
pub fn horizontal_patch(z: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Shape {
    Shape::PlanePatch { normal: Vec3::UNIT_Z, offset: -z, x_range, y_range }
}

/// Plane rising along +x at `grade_deg`, with z = `base_z` at `x_range.0`.
pub fn ramp_x(x_range: (f64, f64), y_range: (f64, f64), base_z: f64, grade_deg: f64) -> Shape {
    // z = base + (x - x0) tan g  ⇔  (-tan g)·x + z + (tan g·x0 - base) = 0
    let t = grade_deg.to_radians().tan();
    let normal = Vec3::new(-t, 0.0, 1.0).normalized().unwrap();
    let offset = -normal.dot(Vec3::new(x_range.0, 0.0, base_z));
    Shape::PlanePatch { normal, offset, x_range, y_range }
}

/// Plane rising along +y at `grade_deg`, with z = `base_z` at `y_range.0`.
pub fn ramp_y(y_range: (f64, f64), x_range: (f64, f64), base_z: f64, grade_deg: f64) -> Shape {
    let t = grade_deg.to_radians().tan();
    let normal = Vec3::new(0.0, -t, 1.0).normalized().unwrap();
    let offset = -normal.dot(Vec3::new(0.0, y_range.0, base_z));
    Shape::PlanePatch { normal, offset, x_range, y_range }
}

fn ground(shape: Shape) -> SceneElement {
    SceneElement { shape, is_ground: true }
}

fn obstacle(shape: Shape) -> SceneElement {
    SceneElement { shape, is_ground: false }
}

fn cuboid(min: (f64, f64, f64), max: (f64, f64, f64)) -> Shape {
    Shape::Cuboid {
        min: Vec3::new(min.0, min.1, min.2),
        max: Vec3::new(max.0, max.1, max.2),
    }
}

fn wall(start: (f64, f64), end: (f64, f64), z_range: (f64, f64)) -> Shape {
    Shape::Wall { start, end, z_range }
}

const RAY_T_MIN: f64 = 1e-9;

impl Shape {
    /// Ray parameter of the nearest intersection, if any.
    fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<f64> {
        match *self {
            Shape::PlanePatch { normal, offset, x_range, y_range } => {
                let denom = normal.dot(dir);
                if denom.abs() < 1e-12 {
                    return None;
                }
                let t = -(normal.dot(origin) + offset) / denom;
                if t <= RAY_T_MIN {
                    return None;
                }
                let hit = origin + dir * t;
                if hit.x >= x_range.0 && hit.x <= x_range.1 && hit.y >= y_range.0 && hit.y <= y_range.1 {
                    Some(t)
                } else {
                    None
                }
            }
            Shape::Cuboid { min, max } => {
                let mut t_near = RAY_T_MIN;
                let mut t_far = f64::INFINITY;
                for axis in 0..3 {
                    let (o, d, lo, hi) = match axis {
                        0 => (origin.x, dir.x, min.x, max.x),
                        1 => (origin.y, dir.y, min.y, max.y),
                        _ => (origin.z, dir.z, min.z, max.z),
                    };
                    if d.abs() < 1e-12 {
                        if o < lo || o > hi {
                            return None;
                        }
                        continue;
                    }
                    let (mut t1, mut t2) = ((lo - o) / d, (hi - o) / d);
                    if t1 > t2 {
                        std::mem::swap(&mut t1, &mut t2);
                    }
                    t_near = t_near.max(t1);
                    t_far = t_far.min(t2);
                    if t_near > t_far {
                        return None;
                    }
                }
                Some(t_near)
            }
            Shape::Wall { start, end, z_range } => {
                let seg = Vec3::new(end.0 - start.0, end.1 - start.1, 0.0);
                let normal = Vec3::new(-seg.y, seg.x, 0.0).normalized()?;
                let denom = normal.dot(dir);
                if denom.abs() < 1e-12 {
                    return None;
                }
                let anchor = Vec3::new(start.0, start.1, 0.0);
                let t = normal.dot(anchor - origin) / denom;
                if t <= RAY_T_MIN {
                    return None;
                }
                let hit = origin + dir * t;
                let along = (hit - anchor).dot(seg) / seg.norm_sq();
                if (0.0..=1.0).contains(&along) && hit.z >= z_range.0 && hit.z <= z_range.1 {
                    Some(t)
                } else {
                    None
                }
            }
        }
    }
}

/// Cast the full scan pattern through the scene. Rays that miss everything
/// produce no point. Deterministic for a given (scene, config, seed); the
/// output is ordered beam-major with `point_id` equal to the output index.
pub fn raycast(scene: &Scene, lidar: &LidarConfig, seed: u64) -> LabeledCloud {
    scene.validate().expect("invalid scene");
    lidar.validate().expect("invalid lidar config");

    let cols = lidar.cols();
    let origin = Vec3::new(0.0, 0.0, lidar.sensor_height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if lidar.noise_sigma > 0.0 {
        Some(Normal::new(0.0, lidar.noise_sigma).unwrap())
    } else {
        None
    };

    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (beam, elev_deg) in lidar.beam_elevations_deg.iter().enumerate() {
        let elev = elev_deg.to_radians();
        let (sin_e, cos_e) = elev.sin_cos();
        for step in 0..cols {
            let az = (step as f64 * lidar.azimuth_resolution_deg).to_radians();
            let dir = Vec3::new(cos_e * az.cos(), cos_e * az.sin(), sin_e);

            let mut best: Option<(f64, bool)> = None;
            for e in &scene.elements {
                if let Some(t) = e.shape.intersect(origin, dir) {
                    if t <= lidar.max_range && best.map_or(true, |(bt, _)| t < bt) {
                        best = Some((t, e.is_ground));
                    }
                }
            }
            let Some((t, is_ground)) = best else { continue };

            let t = match noise {
                Some(n) => {
                    let e: f64 = n.sample(&mut rng);
                    let lim = 4.0 * lidar.noise_sigma;
                    t + e.clamp(-lim, lim)
                }
                None => t,
            };
            let p = origin + dir * t;
            points.push(Point {
                x: p.x,
                y: p.y,
                z: p.z,
                beam: beam as u16,
                azimuth_step: step as u16,
                point_id: points.len() as u32,
            });
            labels.push(is_ground);
        }
    }
    LabeledCloud { points, labels: Some(labels) }
}

/// Built-in scenes exercising the behaviors the detector is designed for.
/// Keys are stable names accepted by the CLI.
pub fn canonical_scenes() -> BTreeMap<&'static str, Scene> {
    let mut scenes = BTreeMap::new();

    // Open flat ground.
    scenes.insert(
        "flat",
        Scene { elements: vec![ground(horizontal_patch(0.0, (-50.0, 50.0), (-50.0, 50.0)))] },
    );

    // Two ground planes meeting at a fold, plus one vertical wall. The wall
    // is a low barrier close behind the sensor: its near-ground band sits
    // inside the flat plane's inlier slab, and the steep beams that graze it
    // produce tangents tilted well away from horizontal.
    scenes.insert(
        "two_slope_wall",
        Scene {
            elements: vec![
                ground(horizontal_patch(0.0, (-45.0, 10.0), (-45.0, 45.0))),
                ground(ramp_x((10.0, 34.0), (-45.0, 45.0), 0.0, 6.0)),
                obstacle(wall((-4.5, -14.0), (-4.5, 14.0), (0.0, 0.8))),
            ],
        },
    );

    // Sloped side lane: flat road with a ramp rising to +y, topped by a gate
    // bar. A fixed longitudinal partition can never isolate the ramp.
    scenes.insert(
        "sloped_lane",
        Scene {
            elements: vec![
                ground(horizontal_patch(0.0, (-45.0, 45.0), (-45.0, 8.0))),
                ground(ramp_y((8.0, 30.0), (-45.0, 45.0), 0.0, 7.0)),
                obstacle(wall((-6.0, 30.0), (6.0, 30.0), (2.7, 4.7))),
            ],
        },
    );

    // Road dropping down a short embankment onto a lower flat section,
    // with a vehicle-sized box ~35 m out on the lower part. The lower
    // ground is far below every beam near the box, so the box has no
    // ground neighbors; the global dominant plane still skims the box's
    // lowest scan ring, while the local plane of that region does not.
    let dip = -1.5f64;
    let embankment_end = 8.0 + (-dip) / 14.0f64.to_radians().tan();
    scenes.insert(
        "far_obstacle",
        Scene {
            elements: vec![
                ground(horizontal_patch(0.0, (-45.0, 8.0), (-45.0, 45.0))),
                ground(ramp_x((8.0, embankment_end), (-45.0, 45.0), 0.0, -14.0)),
                ground(horizontal_patch(dip, (embankment_end, 45.0), (-45.0, 45.0))),
                obstacle(cuboid((34.5, -3.0, dip), (37.0, 3.0, dip + 1.55))),
            ],
        },
    );

    // Traffic-jam clutter: parked-vehicle boxes plus surrounding buildings.
    scenes.insert(
        "crowded",
        Scene {
            elements: vec![
                ground(horizontal_patch(0.0, (-45.0, 45.0), (-45.0, 45.0))),
                obstacle(cuboid((5.0, 3.0, 0.0), (9.4, 4.8, 1.5))),
                obstacle(cuboid((8.0, -8.5, 0.0), (12.4, -6.7, 1.45))),
                obstacle(cuboid((13.0, 2.0, 0.0), (17.4, 3.8, 1.55))),
                obstacle(cuboid((6.5, 10.5, 0.0), (10.9, 12.3, 1.5))),
                obstacle(cuboid((17.0, -3.5, 0.0), (21.4, -1.7, 1.5))),
                obstacle(cuboid((12.0, -14.0, 0.0), (16.4, -12.2, 1.4))),
                obstacle(cuboid((21.0, 7.0, 0.0), (25.4, 8.8, 1.5))),
                obstacle(cuboid((24.0, -7.5, 0.0), (28.4, -5.7, 1.5))),
                obstacle(wall((-25.0, -35.0), (-25.0, 35.0), (0.0, 7.0))),
                obstacle(wall((-35.0, 30.0), (35.0, 30.0), (0.0, 7.0))),
                obstacle(wall((-20.0, -32.0), (40.0, -32.0), (0.0, 6.0))),
            ],
        },
    );

    // Low fences bounding the road. Their returns sit above the inlier band
    // but below every beam that could see ground behind them.
    scenes.insert(
        "low_fence",
        Scene {
            elements: vec![
                ground(horizontal_patch(0.0, (-45.0, 45.0), (-45.0, 45.0))),
                obstacle(wall((17.0, -30.0), (17.0, 30.0), (0.0, 0.4))),
                obstacle(wall((-30.0, -17.0), (30.0, -17.0), (0.0, 0.4))),
            ],
        },
    );

    // Non-horizontal road: ±2° roll that flips partway along x. Lowest
    // points cluster in one corner of any longitudinal slab, so a plane
    // seeded there misfits the rest.
    scenes.insert(
        "tilted_ground",
        Scene {
            elements: vec![
                ground(Shape::PlanePatch {
                    normal: Vec3::new(0.0, -(2.0f64.to_radians().tan()), 1.0).normalized().unwrap(),
                    offset: 0.0,
                    x_range: (-45.0, 4.0),
                    y_range: (-45.0, 45.0),
                }),
                ground(Shape::PlanePatch {
                    normal: Vec3::new(0.0, 2.0f64.to_radians().tan(), 1.0).normalized().unwrap(),
                    offset: 0.0,
                    x_range: (4.0, 45.0),
                    y_range: (-45.0, 45.0),
                }),
            ],
        },
    );

    for scene in scenes.values() {
        debug_assert!(scene.validate().is_ok());
    }
    scenes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_scene_returns_only_downward_beams() {
        let scenes = canonical_scenes();
        let mut lidar = LidarConfig::default();
        lidar.noise_sigma = 0.01;
        let cloud = raycast(&scenes["flat"], &lidar, 42);
        assert!(!cloud.points.is_empty());
        let sigma = lidar.noise_sigma;
        for p in &cloud.points {
            assert!(p.z.abs() <= 3.0 * sigma, "flat return off the plane: z = {}", p.z);
        }
        let labels = cloud.labels.as_ref().unwrap();
        assert!(labels.iter().all(|&l| l));
        // Upward beams never return on flat ground.
        assert!(cloud.points.iter().all(|p| p.beam < 8));
    }

    #[test]
    fn flat_scene_ground_beam_count_per_azimuth() {
        let scenes = canonical_scenes();
        let mut lidar = LidarConfig::default();
        lidar.noise_sigma = 0.0;
        let cloud = raycast(&scenes["flat"], &lidar, 0);
        let cols = lidar.cols();
        let mut per_azimuth = vec![0usize; cols];
        for p in &cloud.points {
            per_azimuth[p.azimuth_step as usize] += 1;
        }
        for (az, count) in per_azimuth.iter().enumerate() {
            assert!(
                (6..=8).contains(count),
                "azimuth {az}: {count} ground beams (expected 6..=8)"
            );
        }
    }

    #[test]
    fn raycast_is_deterministic() {
        let scenes = canonical_scenes();
        let lidar = LidarConfig::default();
        let a = raycast(&scenes["two_slope_wall"], &lidar, 7);
        let b = raycast(&scenes["two_slope_wall"], &lidar, 7);
        assert_eq!(a.points, b.points);
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn noiseless_returns_lie_on_surfaces() {
        let scenes = canonical_scenes();
        let mut lidar = LidarConfig::default();
        lidar.noise_sigma = 0.0;
        let scene = &scenes["two_slope_wall"];
        let cloud = raycast(scene, &lidar, 0);
        for p in cloud.points.iter().step_by(37) {
            let on_some_surface = scene.elements.iter().any(|e| match e.shape {
                Shape::PlanePatch { normal, offset, .. } => {
                    (normal.dot(p.pos()) + offset).abs() < 1e-9
                }
                Shape::Cuboid { min, max } => {
                    let eps = 1e-9;
                    (p.x - min.x).abs() < eps
                        || (p.x - max.x).abs() < eps
                        || (p.y - min.y).abs() < eps
                        || (p.y - max.y).abs() < eps
                        || (p.z - min.z).abs() < eps
                        || (p.z - max.z).abs() < eps
                }
                Shape::Wall { start, end, .. } => {
                    let seg = Vec3::new(end.0 - start.0, end.1 - start.1, 0.0);
                    let n = Vec3::new(-seg.y, seg.x, 0.0).normalized().unwrap();
                    (n.dot(p.pos() - Vec3::new(start.0, start.1, 0.0))).abs() < 1e-9
                }
            });
            assert!(on_some_surface, "point {:?} is off every surface", p);
        }
    }

    #[test]
    fn canonical_scene_compositions() {
        let scenes = canonical_scenes();
        for name in ["flat", "two_slope_wall", "sloped_lane", "far_obstacle", "crowded", "low_fence", "tilted_ground"] {
            assert!(scenes.contains_key(name), "missing scene {name}");
            scenes[name].validate().unwrap();
        }
        assert_eq!(scenes["flat"].elements.len(), 1);

        let tsw = &scenes["two_slope_wall"];
        let grounds = tsw.elements.iter().filter(|e| e.is_ground).count();
        let walls = tsw
            .elements
            .iter()
            .filter(|e| matches!(e.shape, Shape::Wall { .. }) && !e.is_ground)
            .count();
        assert_eq!(grounds, 2, "two ground planes meeting at a fold");
        assert_eq!(walls, 1, "one vertical wall");

        // Far obstacle: nearest box face ~35 m out.
        let fo = &scenes["far_obstacle"];
        let near_face = fo
            .elements
            .iter()
            .find_map(|e| match e.shape {
                Shape::Cuboid { min, .. } if !e.is_ground => Some(min.x),
                _ => None,
            })
            .unwrap();
        assert!((near_face - 35.0).abs() < 1.0, "box face at {near_face}, expected ≈35 m");
    }

    #[test]
    fn scene_toml_roundtrip() {
        let text = r#"
[[element]]
kind = "ground_plane"
z = 0.0
x_range = [-40.0, 40.0]
y_range = [-40.0, 40.0]

[[element]]
kind = "ramp"
axis = "x"
range = [10.0, 30.0]
cross_range = [-40.0, 40.0]
base_z = 0.0
grade_deg = 6.0

[[element]]
kind = "box"
min = [20.0, -2.0, 0.0]
max = [24.0, 2.0, 1.5]

[[element]]
kind = "wall"
start = [30.0, -10.0]
end = [30.0, 10.0]
z_range = [0.0, 2.0]
"#;
        let scene = Scene::from_toml_str(text).unwrap();
        assert_eq!(scene.elements.len(), 4);
        assert!(scene.elements[0].is_ground);
        assert!(scene.elements[1].is_ground);
        assert!(!scene.elements[2].is_ground);
        assert!(!scene.elements[3].is_ground);
    }

    #[test]
    fn scene_without_ground_is_rejected() {
        let text = r#"
[[element]]
kind = "box"
min = [0.0, 0.0, 0.0]
max = [1.0, 1.0, 1.0]
"#;
        assert!(Scene::from_toml_str(text).is_err());
    }

    #[test]
    fn steep_ground_is_rejected() {
        let scene = Scene {
            elements: vec![ground(ramp_x((0.0, 10.0), (-5.0, 5.0), 0.0, 35.0))],
        };
        assert!(scene.validate().is_err());
    }
}
