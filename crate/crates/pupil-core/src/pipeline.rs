//! The detection pipeline: edge path first, convolution fallback second,
//! validation last.

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use crate::canny::{canny, CannyOptions};
use crate::coarse::{
    build_kernels, coarse_responses, downscale_dark_mean, optimize_position, radius_filter_for,
    select_coarse_position_in, upscale_position, validate_position, FloatImage,
};
use crate::fit::EllipseParams;
use crate::lines::{collect_lines, prune_lines, Polyline};
use crate::morph::{
    break_line_algorithmic, break_orthogonals, delete_junctions, straighten_edges, thin_edges,
};
use crate::params::DetectorParams;
use crate::raster::{normalize, processing_region, save_pgm, EdgeImage, GrayImage};
use crate::select::{best_candidate_index, evaluate_lines, LineEvaluation};

/// Which part of the pipeline produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Ellipse selected from filtered edge lines.
    Edge,
    /// Convolution fallback on the downscaled image.
    Coarse,
    /// Nothing plausible found (or the candidate failed validation).
    None,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Edge => "edge",
            Stage::Coarse => "coarse",
            Stage::None => "none",
        })
    }
}

/// Wall-clock cost of each path, microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Timings {
    pub edge_us: u64,
    pub coarse_us: u64,
    pub total_us: u64,
}

/// Detection outcome for one image.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Sub-pixel pupil center; absent when `stage` is `None`.
    pub center: Option<(f64, f64)>,
    /// Fitted ellipse; present exactly when the edge path succeeded.
    pub ellipse: Option<EllipseParams>,
    pub stage: Stage,
    pub valid: bool,
    pub timings: Timings,
}

/// Receiver for intermediate artifacts. Every hook has a no-op default, so
/// observability can never change a detection result.
pub trait DebugSink {
    fn image(&mut self, _name: &str, _img: &GrayImage) {}
    fn edges(&mut self, _name: &str, _edges: &EdgeImage) {}
    fn lines(&mut self, _name: &str, _lines: &[Polyline], _width: usize, _height: usize) {}
    fn candidates(&mut self, _evals: &[LineEvaluation]) {}
    fn response(&mut self, _name: &str, _map: &FloatImage) {}
}

/// Sink that drops everything.
#[derive(Debug, Default)]
pub struct NullSink;

impl DebugSink for NullSink {}

/// Sink that writes PGM / CSV artifacts into a directory. Write failures
/// are recorded as warnings and never interrupt detection.
#[derive(Debug)]
pub struct FileSink {
    dir: PathBuf,
    warnings: Vec<String>,
    written: usize,
}

impl FileSink {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            warnings: Vec::new(),
            written: 0,
        }
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn artifacts_written(&self) -> usize {
        self.written
    }

    fn write_gray(&mut self, name: &str, img: &GrayImage) {
        let path = self.dir.join(format!("{name}.pgm"));
        match save_pgm(img, &path) {
            Ok(()) => self.written += 1,
            Err(e) => self.warnings.push(format!("{}: {e}", path.display())),
        }
    }
}

impl DebugSink for FileSink {
    fn image(&mut self, name: &str, img: &GrayImage) {
        self.write_gray(name, img);
    }

    fn edges(&mut self, name: &str, edges: &EdgeImage) {
        self.write_gray(name, &edges.to_gray());
    }

    fn lines(&mut self, name: &str, lines: &[Polyline], width: usize, height: usize) {
        let mut overlay = GrayImage::filled(width, height, 0);
        for line in lines {
            for p in &line.points {
                if p.x >= 0 && p.y >= 0 && (p.x as usize) < width && (p.y as usize) < height {
                    overlay.set(p.x as usize, p.y as usize, 255);
                }
            }
        }
        self.write_gray(name, &overlay);
    }

    fn candidates(&mut self, evals: &[LineEvaluation]) {
        let mut csv = String::from(
            "line_id,support,a,b,angle,ratio_ok,area_ok,surface_diff,surface_ok,gray_value,eval\n",
        );
        for ev in evals {
            let (a, b, angle) = ev
                .ellipse
                .map(|e| (e.radius_major, e.radius_minor, e.angle))
                .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
            csv.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{},{},{:.4},{},{:.4},{:.4}\n",
                ev.line_index,
                ev.support,
                a,
                b,
                angle,
                ev.ratio_ok,
                ev.area_ok,
                ev.surface_diff.unwrap_or(f64::NAN),
                ev.surface_ok,
                ev.gray_value.unwrap_or(f64::NAN),
                ev.eval.unwrap_or(f64::NAN),
            ));
        }
        let path = self.dir.join("candidates.csv");
        match std::fs::write(&path, csv) {
            Ok(()) => self.written += 1,
            Err(e) => self.warnings.push(format!("{}: {e}", path.display())),
        }
    }

    fn response(&mut self, name: &str, map: &FloatImage) {
        self.write_gray(name, &map.to_gray_normalized());
    }
}

/// Detect the pupil in a grayscale eye image.
///
/// Never fails: anything that goes wrong inside degrades to
/// `Stage::None` with `valid == false`.
pub fn detect(img: &GrayImage, params: &DetectorParams) -> DetectionResult {
    detect_with_debug(img, params, &mut NullSink)
}

/// [`detect`], additionally streaming every intermediate artifact into the
/// sink.
pub fn detect_with_debug(
    img: &GrayImage,
    params: &DetectorParams,
    sink: &mut dyn DebugSink,
) -> DetectionResult {
    let t_total = Instant::now();
    let mut timings = Timings::default();

    let none = |mut timings: Timings, t_total: Instant| {
        timings.total_us = t_total.elapsed().as_micros() as u64;
        DetectionResult {
            center: None,
            ellipse: None,
            stage: Stage::None,
            valid: false,
            timings,
        }
    };

    if img.width() == 0 || img.height() == 0 || params.validate().is_err() {
        return none(timings, t_total);
    }

    // ---- edge path ----
    let t_edge = Instant::now();
    let norm = normalize(img);
    sink.image("normalized", &norm);

    let Ok(region) = processing_region(&norm, params.border_fraction) else {
        return none(timings, t_total);
    };
    let edges = canny(
        &norm,
        region,
        CannyOptions {
            sigma: params.canny_sigma,
            percentile: params.canny_percentile,
            low_ratio: params.canny_low_ratio,
            min_high: params.canny_min_high,
        },
    );
    sink.edges("edges_raw", &edges);

    let thinned = thin_edges(&edges);
    sink.edges("edges_thinned", &thinned);
    let junction_free = delete_junctions(&thinned);
    sink.edges("edges_junction_free", &junction_free);
    let straightened = straighten_edges(&junction_free);
    sink.edges("edges_straightened", &straightened);

    let lines: Vec<Polyline> = if params.use_algorithmic_split {
        collect_lines(&straightened)
            .iter()
            .flat_map(break_line_algorithmic)
            .collect()
    } else {
        let broken = break_orthogonals(&straightened);
        sink.edges("edges_broken", &broken);
        collect_lines(&broken)
    };
    let pruned = prune_lines(lines, params.min_line_length, params.min_mean_line_dist);
    sink.lines("lines_pruned", &pruned, norm.width(), norm.height());

    let evals = evaluate_lines(&norm, &pruned, params);
    sink.candidates(&evals);
    let best = best_candidate_index(&evals).map(|i| evals[i].clone());
    timings.edge_us = t_edge.elapsed().as_micros() as u64;

    if let Some(ev) = best {
        let el = ev.ellipse.expect("winning candidate carries its ellipse");
        timings.total_us = t_total.elapsed().as_micros() as u64;
        return DetectionResult {
            center: Some((el.center_x, el.center_y)),
            ellipse: Some(el),
            stage: Stage::Edge,
            valid: true,
            timings,
        };
    }

    // ---- coarse fallback ----
    let t_coarse = Instant::now();
    let radius_filter = radius_filter_for(norm.width(), norm.height());
    let Ok(small) = downscale_dark_mean(&norm, params.radius_scale) else {
        timings.coarse_us = t_coarse.elapsed().as_micros() as u64;
        return none(timings, t_total);
    };
    sink.image("downscaled", &small);

    let kernels = build_kernels(radius_filter);
    let Ok(responses) = coarse_responses(&small, &kernels) else {
        timings.coarse_us = t_coarse.elapsed().as_micros() as u64;
        return none(timings, t_total);
    };
    sink.response("response_surface", &responses.surface);
    sink.response("response_mean", &responses.mean);
    sink.response("response_product", &responses.product);

    let (pos_small, response) =
        select_coarse_position_in(&responses, Some((&region, params.radius_scale)));
    if response <= 0.0 {
        // A non-positive best response means no dark-on-bright structure
        // anywhere; refining it would chase noise.
        timings.coarse_us = t_coarse.elapsed().as_micros() as u64;
        return none(timings, t_total);
    }
    let coarse_full = upscale_position(pos_small, params.radius_scale, norm.width(), norm.height());
    let refined = optimize_position(
        &norm,
        coarse_full,
        radius_filter,
        params.size_neighbourhood,
    );
    let (valid, _diff) = validate_position(
        &norm,
        refined,
        radius_filter,
        params.validity_threshold,
        params.validation_box_literal,
    );
    timings.coarse_us = t_coarse.elapsed().as_micros() as u64;
    timings.total_us = t_total.elapsed().as_micros() as u64;

    if valid {
        DetectionResult {
            center: Some(refined),
            ellipse: None,
            stage: Stage::Coarse,
            valid: true,
            timings,
        }
    } else {
        DetectionResult {
            center: None,
            ellipse: None,
            stage: Stage::None,
            valid: false,
            timings,
        }
    }
}
