//! Batch detection, rate computation, runtime measurement and parameter
//! sweeps.

use std::time::Instant;

use pupil_core::{detect, DetectorParams, GrayImage, ParamError, Stage};

use crate::curve::RateCurve;
use crate::dataset::Dataset;

/// Per-image outcome of an evaluation run.
#[derive(Debug, Clone)]
pub struct ImageOutcome {
    pub filename: String,
    pub truth: Option<(f64, f64)>,
    pub center: Option<(f64, f64)>,
    pub stage: Stage,
    pub valid: bool,
    /// Euclidean distance to the label; absent when the detector returned
    /// nothing or the image carries no label.
    pub error: Option<f64>,
    pub micros: u64,
}

/// Evaluation result: the rate curve over labeled images plus blink
/// accounting for unlabeled ones.
#[derive(Debug)]
pub struct Evaluation {
    pub curve: RateCurve,
    pub outcomes: Vec<ImageOutcome>,
    /// Images without a label where the detector still reported a pupil.
    pub false_positives: usize,
    pub unlabeled_images: usize,
}

/// Run the detector over a dataset and fold errors into a rate curve.
/// Images the detector rejects count as failures at every threshold;
/// unlabeled images feed the false-positive tally instead of the curve.
pub fn evaluate(dataset: &Dataset, params: &DetectorParams, max_error: usize) -> Evaluation {
    let mut outcomes = Vec::with_capacity(dataset.pairs.len());
    let mut errors = Vec::new();
    let mut false_positives = 0usize;
    let mut unlabeled = 0usize;

    for (img, record) in &dataset.pairs {
        let start = Instant::now();
        let result = detect(img, params);
        let micros = start.elapsed().as_micros() as u64;
        let error = match (record.center, result.center, result.valid) {
            (Some((tx, ty)), Some((cx, cy)), true) => {
                Some(((cx - tx).powi(2) + (cy - ty).powi(2)).sqrt())
            }
            _ => None,
        };
        match record.center {
            Some(_) => errors.push(error),
            None => {
                unlabeled += 1;
                if result.valid {
                    false_positives += 1;
                }
            }
        }
        outcomes.push(ImageOutcome {
            filename: record.filename.clone(),
            truth: record.center,
            center: result.center,
            stage: result.stage,
            valid: result.valid,
            error,
            micros,
        });
    }

    Evaluation {
        curve: RateCurve::from_errors(dataset.name.clone(), &errors, max_error),
        outcomes,
        false_positives,
        unlabeled_images: unlabeled,
    }
}

/// Latency statistics of repeated single-threaded detection.
#[derive(Debug, Clone)]
pub struct BenchStats {
    pub frames: usize,
    pub samples: usize,
    pub mean_us: f64,
    pub p50_us: u64,
    pub p95_us: u64,
    /// Mean edge-path cost over frames that ran it.
    pub edge_mean_us: f64,
    /// Mean fallback cost over frames that ran it.
    pub coarse_mean_us: f64,
}

/// Time `detect` over every image, `repetitions` times, single-threaded.
/// One full warmup pass runs first and is excluded.
pub fn benchmark(images: &[GrayImage], params: &DetectorParams, repetitions: usize) -> BenchStats {
    for img in images {
        let _ = detect(img, params);
    }
    let mut samples = Vec::with_capacity(images.len() * repetitions.max(1));
    let mut edge = Vec::new();
    let mut coarse = Vec::new();
    for _ in 0..repetitions.max(1) {
        for img in images {
            let start = Instant::now();
            let result = detect(img, params);
            samples.push(start.elapsed().as_micros() as u64);
            if result.timings.edge_us > 0 {
                edge.push(result.timings.edge_us);
            }
            if result.timings.coarse_us > 0 {
                coarse.push(result.timings.coarse_us);
            }
        }
    }
    samples.sort_unstable();
    let mean = |v: &[u64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<u64>() as f64 / v.len() as f64
        }
    };
    BenchStats {
        frames: images.len(),
        samples: samples.len(),
        mean_us: mean(&samples),
        p50_us: samples[samples.len() / 2],
        p95_us: samples[samples.len() * 95 / 100],
        edge_mean_us: mean(&edge),
        coarse_mean_us: mean(&coarse),
    }
}

/// Evaluate once per value of one parameter, everything else at the given
/// base configuration.
pub fn sweep(
    dataset: &Dataset,
    base: &DetectorParams,
    field: &str,
    values: &[String],
    max_error: usize,
) -> Result<Vec<(String, RateCurve)>, ParamError> {
    let mut curves = Vec::with_capacity(values.len());
    for value in values {
        let mut params = base.clone();
        params.set(field, value)?;
        params.validate()?;
        let mut eval = evaluate(dataset, &params, max_error);
        eval.curve.name = format!("{field}={value}");
        curves.push((value.clone(), eval.curve));
    }
    Ok(curves)
}
