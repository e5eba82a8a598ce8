//! Segmentation metrics against labeled clouds and wall-clock benchmarking
//! of the detection methods.

use std::time::Instant;

use thiserror::Error;

use crate::baselines;
use crate::config::{DetectorConfig, Method};
use crate::partition::{self, DetectError, GroundLabeling};
use crate::scan::{LabeledCloud, Point};

/// Confusion counts of a predicted labeling against ground truth.
/// "Positive" means labeled ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentationMetrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

impl SegmentationMetrics {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }

    /// TP / (TP + FP); `None` when nothing was predicted positive. An empty
    /// prediction is undefined, not perfect and not zero.
    pub fn precision(&self) -> Option<f64> {
        let denom = self.true_positives + self.false_positives;
        (denom > 0).then(|| self.true_positives as f64 / denom as f64)
    }

    /// TP / (TP + FN); `None` when the truth has no positives.
    pub fn recall(&self) -> Option<f64> {
        let denom = self.true_positives + self.false_negatives;
        (denom > 0).then(|| self.true_positives as f64 / denom as f64)
    }

    /// Harmonic mean of precision and recall; `None` when either is
    /// undefined or both are zero.
    pub fn f1(&self) -> Option<f64> {
        let (p, r) = (self.precision()?, self.recall()?);
        if p + r == 0.0 {
            None
        } else {
            Some(2.0 * p * r / (p + r))
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("truth cloud carries no labels")]
    MissingLabels,
    #[error("prediction covers {predicted} point ids but truth has {truth}")]
    IdMismatch { predicted: usize, truth: usize },
}

/// Confusion counts of `predicted` against the truth labels, over every
/// labeled point. The prediction must cover the truth's point-id space.
pub fn score(predicted: &GroundLabeling, truth: &LabeledCloud) -> Result<SegmentationMetrics, EvalError> {
    let labels = truth.labels.as_ref().ok_or(EvalError::MissingLabels)?;
    score_flags(&predicted.ground, truth.points.len(), labels)
}

/// `score` over a raw per-id flag vector.
pub fn score_flags(
    predicted: &[bool],
    truth_points: usize,
    truth_labels: &[bool],
) -> Result<SegmentationMetrics, EvalError> {
    if predicted.len() != truth_points || truth_labels.len() != truth_points {
        return Err(EvalError::IdMismatch { predicted: predicted.len(), truth: truth_points });
    }
    let mut m = SegmentationMetrics {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
    };
    for (&p, &t) in predicted.iter().zip(truth_labels) {
        match (p, t) {
            (true, true) => m.true_positives += 1,
            (true, false) => m.false_positives += 1,
            (false, true) => m.false_negatives += 1,
            (false, false) => m.true_negatives += 1,
        }
    }
    Ok(m)
}

/// Run one detection method end to end.
pub fn run_method(
    method: Method,
    points: &[Point],
    config: &DetectorConfig,
) -> Result<GroundLabeling, DetectError> {
    match method {
        Method::Proposed => partition::detect_ground(points, config),
        Method::Vanilla => baselines::vanilla_pipeline(points, config),
        Method::Lpr => baselines::lpr_pipeline(points, config),
    }
}

/// Wall-clock statistics of repeated detection runs.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub method: Method,
    pub runs: usize,
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub points: usize,
    pub config_hash: String,
}

/// Time `runs` detection calls (detection only, no I/O). Run `i` uses seed
/// `config.seed + i` so repeated reports are comparable.
pub fn bench(
    method: Method,
    points: &[Point],
    runs: usize,
    config: &DetectorConfig,
) -> Result<BenchReport, DetectError> {
    assert!(runs >= 1, "need at least one run");
    let mut times_ms = Vec::with_capacity(runs);
    for i in 0..runs {
        let mut run_config = config.clone();
        run_config.seed = config.seed.wrapping_add(i as u64);
        let start = Instant::now();
        let labeling = run_method(method, points, &run_config)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(&labeling);
        times_ms.push(elapsed);
    }
    let mean_ms = times_ms.iter().sum::<f64>() / runs as f64;
    let mut sorted = times_ms;
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    // Nearest-rank 95th percentile.
    let rank = ((0.95 * runs as f64).ceil() as usize).clamp(1, runs);
    let p95_ms = sorted[rank - 1];
    Ok(BenchReport {
        method,
        runs,
        mean_ms,
        p95_ms,
        points: points.len(),
        config_hash: config.content_hash(),
    })
}
