//! Evaluation harness for the pupil detector: dataset ingestion, batch
//! detection-rate evaluation, runtime benchmarks, parameter sweeps and CSV
//! reports. The `pupil-eval` binary fronts everything; this library keeps
//! the pieces testable.

pub mod curve;
pub mod dataset;
pub mod report;
pub mod runner;

pub use curve::{aggregate, RateCurve};
pub use dataset::{
    convert_ground_truth, load_dataset, load_images, parse_gt_csv, DataError, Dataset,
    GroundTruthRecord,
};
pub use report::{parse_baselines, write_image_log, write_reports, BaselineRow};
pub use runner::{benchmark, evaluate, sweep, BenchStats, Evaluation, ImageOutcome};
