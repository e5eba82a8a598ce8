//! Ground-surface detection for sparse rotating-lidar point clouds.
//!
//! Low-beam-count lidars leave too few returns per surface patch for
//! point-wise normal estimation, but returns along one beam are densely
//! spaced, so the curve tangent at each point is still well determined.
//! This crate builds a detector around that observation:
//!
//! 1. **Scan organization** ([`scan`]) — clouds are arranged into a
//!    beams×azimuth grid; tangents are differentiated along rows
//!    ([`tangent`]).
//! 2. **Tangent-verified RANSAC** ([`ransac`]) — plane hypotheses accept a
//!    point only if it is close to the plane *and* its tangent lies in the
//!    plane.
//! 3. **Disjoint multi-plane fitting** ([`partition`]) — the bounding
//!    square is split by one cross cut into four rectangles, each fitted
//!    with its own hypothesis. Per-hypothesis inlier counts are binned
//!    onto a grid and turned into integral images, so the exhaustive
//!    search over every cut position runs in O(B²·M).
//!
//! [`baselines`] holds the single-plane and fixed-partition comparison
//! methods, [`simulate`] a deterministic lidar raycaster with labeled
//! scenes, and [`eval`] metrics plus benchmarking.

pub mod baselines;
pub mod config;
pub mod eval;
pub mod geom;
pub mod io;
pub mod partition;
pub mod ransac;
pub mod scan;
pub mod simulate;
pub mod tangent;

pub use config::{DetectorConfig, Method};
pub use geom::Vec3;
pub use partition::{detect_ground, GroundLabeling, Outcome, PartitionResult};
pub use ransac::{InlierMask, PlaneHypothesis, VerifyParams};
pub use scan::{CloudBounds, LabeledCloud, Point, RangeScan};
pub use simulate::{canonical_scenes, raycast, LidarConfig, Scene};
pub use tangent::{TangentField, TangentParams};
