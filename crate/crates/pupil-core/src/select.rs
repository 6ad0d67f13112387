//! Candidate ellipse screening and rating.
//!
//! Each surviving line is fitted, screened by shape, area and
//! surround-contrast plausibility, then rated by the intensity just inside
//! its boundary weighted by elongation. The candidate with the lowest
//! rating wins; a darker, rounder interior always beats a brighter or more
//! stretched one.

use std::collections::HashSet;

use crate::fit::{fit_ellipse_lsq, EllipseParams};
use crate::lines::Polyline;
use crate::params::DetectorParams;
use crate::raster::{round_half_up, GrayImage};

/// A rated candidate.
#[derive(Debug, Clone)]
pub struct CandidateScore {
    pub ellipse: EllipseParams,
    /// Mean intensity sampled just inside the fitted boundary.
    pub gray_value: f64,
    /// `gray_value * (1 + (major - minor))`; lower is better.
    pub eval: f64,
    /// Number of edge points on the source line.
    pub support: usize,
}

/// Full evaluation trace of one line, kept for debug reporting.
#[derive(Debug, Clone)]
pub struct LineEvaluation {
    pub line_index: usize,
    pub support: usize,
    pub ellipse: Option<EllipseParams>,
    pub ratio_ok: bool,
    pub area_ok: bool,
    pub surface_diff: Option<f64>,
    pub surface_ok: bool,
    pub gray_value: Option<f64>,
    pub eval: Option<f64>,
}

/// Shape screen: reject stretched ellipses.
pub fn check_radii_ratio(el: &EllipseParams, radii_ratio: f64) -> bool {
    el.radius_major / el.radius_minor <= radii_ratio
}

/// Area screen: the ellipse must occupy a plausible fraction of the image.
pub fn check_area(
    el: &EllipseParams,
    img_w: usize,
    img_h: usize,
    min_area: f64,
    max_area: f64,
) -> bool {
    let total = (img_w * img_h) as f64;
    if total <= 0.0 {
        return false;
    }
    let area = std::f64::consts::PI * el.radius_major * el.radius_minor;
    area >= min_area * total && area <= max_area * total
}

/// Contrast screen: mean intensity of a surrounding ring minus the mean of
/// an inner box.
///
/// `half_w`/`half_h` are the half-extents of the reference box. The inner
/// box uses half of them; the ring lies between the reference box and its
/// 3/2-scaled version. Boxes are clipped to the image; an empty inner box
/// or ring yields `(false, 0.0)`.
pub fn surface_difference_validity(
    img: &GrayImage,
    center: (f64, f64),
    half_w: f64,
    half_h: f64,
    validity_threshold: f64,
) -> (bool, f64) {
    let (cx, cy) = center;
    let bounds = |hw: f64, hh: f64| -> (i64, i64, i64, i64) {
        (
            (cx - hw).ceil() as i64,
            (cy - hh).ceil() as i64,
            (cx + hw).floor() as i64,
            (cy + hh).floor() as i64,
        )
    };
    let (ix0, iy0, ix1, iy1) = bounds(half_w / 2.0, half_h / 2.0);
    let Some(inner_mean) = img.mean_in_rect(ix0, iy0, ix1, iy1) else {
        return (false, 0.0);
    };

    let (mx0, my0, mx1, my1) = bounds(half_w, half_h);
    let (ox0, oy0, ox1, oy1) = bounds(1.5 * half_w, 1.5 * half_h);
    let mut sum = 0u64;
    let mut count = 0u64;
    for y in oy0.max(0)..=oy1.min(img.height() as i64 - 1) {
        for x in ox0.max(0)..=ox1.min(img.width() as i64 - 1) {
            if x >= mx0 && x <= mx1 && y >= my0 && y <= my1 {
                continue; // inside the reference box, not part of the ring
            }
            sum += img.get(x as usize, y as usize) as u64;
            count += 1;
        }
    }
    if count == 0 {
        return (false, 0.0);
    }
    let diff = sum as f64 / count as f64 - inner_mean;
    (diff > validity_threshold, diff)
}

/// Mean intensity just inside the boundary described by `line` and its
/// fitted ellipse.
///
/// Every line pixel is pulled toward the ellipse center by each factor of
/// the shrink walk; each resulting pixel contributes its intensity at most
/// once. Returns `None` when no sample lands inside the image.
pub fn inner_gray_value(
    img: &GrayImage,
    line: &Polyline,
    el: &EllipseParams,
    shrink_factors: &[f64],
) -> Option<(f64, usize)> {
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let mut sum = 0u64;
    for p in &line.points {
        let vx = p.x as f64 - el.center_x;
        let vy = p.y as f64 - el.center_y;
        for &k in shrink_factors {
            let sx = round_half_up(el.center_x + k * vx) as i64;
            let sy = round_half_up(el.center_y + k * vy) as i64;
            let Some(v) = img.get_checked(sx, sy) else {
                continue;
            };
            if seen.insert((sx, sy)) {
                sum += v as u64;
            }
        }
    }
    if seen.is_empty() {
        None
    } else {
        Some((sum as f64 / seen.len() as f64, seen.len()))
    }
}

/// Rate every line against the screens; the trace keeps per-line verdicts
/// for debugging.
pub fn evaluate_lines(
    img: &GrayImage,
    lines: &[Polyline],
    params: &DetectorParams,
) -> Vec<LineEvaluation> {
    let shrink = params.shrink_factors();
    lines
        .iter()
        .enumerate()
        .map(|(line_index, line)| {
            let mut ev = LineEvaluation {
                line_index,
                support: line.len(),
                ellipse: None,
                ratio_ok: false,
                area_ok: false,
                surface_diff: None,
                surface_ok: false,
                gray_value: None,
                eval: None,
            };
            let pts: Vec<(f64, f64)> = line
                .points
                .iter()
                .map(|p| (p.x as f64, p.y as f64))
                .collect();
            let Ok(el) = fit_ellipse_lsq(&pts) else {
                return ev;
            };
            ev.ellipse = Some(el);
            ev.ratio_ok = check_radii_ratio(&el, params.radii_ratio);
            if !ev.ratio_ok {
                return ev;
            }
            ev.area_ok = check_area(
                &el,
                img.width(),
                img.height(),
                params.min_area,
                params.max_area,
            );
            if !ev.area_ok {
                return ev;
            }
            let center_inside = el.center_x >= 0.0
                && el.center_y >= 0.0
                && (el.center_x as usize) < img.width()
                && (el.center_y as usize) < img.height();
            if !center_inside {
                return ev;
            }
            let (hx, hy) = el.bounding_half_extents();
            let (ok, diff) = surface_difference_validity(
                img,
                (el.center_x, el.center_y),
                hx,
                hy,
                params.validity_threshold,
            );
            ev.surface_diff = Some(diff);
            ev.surface_ok = ok;
            if !ok {
                return ev;
            }
            if let Some((gray, _count)) = inner_gray_value(img, line, &el, &shrink) {
                ev.gray_value = Some(gray);
                ev.eval = Some(gray * (1.0 + el.radius_spread()));
            }
            ev
        })
        .collect()
}

/// Index of the winning evaluation: minimal rating, ties broken by the
/// larger support, then by line order.
pub fn best_candidate_index(evals: &[LineEvaluation]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, ev) in evals.iter().enumerate() {
        let Some(score) = ev.eval else { continue };
        match best {
            None => best = Some(i),
            Some(b) => {
                let cur = evals[b].eval.unwrap();
                if score < cur || (score == cur && ev.support > evals[b].support) {
                    best = Some(i);
                }
            }
        }
    }
    best
}

/// Run the full screen-and-rate sequence and return the winner.
pub fn select_best_ellipse(
    img: &GrayImage,
    lines: &[Polyline],
    params: &DetectorParams,
) -> Option<CandidateScore> {
    let evals = evaluate_lines(img, lines, params);
    best_candidate_index(&evals).map(|i| {
        let ev = &evals[i];
        CandidateScore {
            ellipse: ev.ellipse.unwrap(),
            gray_value: ev.gray_value.unwrap(),
            eval: ev.eval.unwrap(),
            support: ev.support,
        }
    })
}
