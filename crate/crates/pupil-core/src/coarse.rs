//! Fallback pupil localization by convolution on a dark-weighted
//! downscaled image.
//!
//! When edge selection produces nothing usable (motion blur, lashes,
//! scattered reflections), the image is shrunk with a low-pass that favors
//! dark pixels, convolved with a circular surface-difference filter and a
//! circular mean filter, and the pointwise product of the surface response
//! with the inverted mean response picks the most pupil-like location.
//! The hit is then refined on the full-scale image and validated.

use std::fmt;

use crate::raster::{round_half_up, GrayImage, Region};
use crate::select::surface_difference_validity;

/// Row-major real-valued raster for convolution responses.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.data().iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Min-max normalize into an 8-bit image for debug dumps.
    pub fn to_gray_normalized(&self) -> GrayImage {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = if hi > lo { hi - lo } else { 1.0 };
        let bytes = self
            .data
            .iter()
            .map(|&v| round_half_up((v - lo) * 255.0 / span) as u8)
            .collect();
        GrayImage::from_raw(self.width, self.height, bytes).unwrap()
    }
}

/// Square convolution stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    side: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    fn get(&self, kx: usize, ky: usize) -> f64 {
        self.weights[ky * self.side + kx]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The two circular filters of the fallback path, built for one
/// `radius_filter`.
#[derive(Debug, Clone)]
pub struct CircularKernels {
    /// Disk of weights summing to one; everything outside the disk is zero.
    pub mean_kernel: Kernel,
    /// Inner disk summing to minus one surrounded by a ring summing to
    /// plus one; responds strongest where a dark blob sits on bright
    /// ground.
    pub surface_kernel: Kernel,
    pub radius_filter: usize,
}

/// Errors of the fallback path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoarseError {
    /// Image too small for one downscale window or for the kernel.
    TooSmall(String),
    BadParameter(String),
}

impl fmt::Display for CoarseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoarseError::TooSmall(msg) => write!(f, "image too small: {msg}"),
            CoarseError::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
        }
    }
}

impl std::error::Error for CoarseError {}

/// Filter radius derived from the image resolution: one percent of the
/// larger dimension, rounded up.
pub fn radius_filter_for(img_w: usize, img_h: usize) -> usize {
    img_w.max(img_h).div_ceil(100)
}

/// Downscale by averaging only the darker half of each window.
///
/// Output pixel (i, j) covers the square window of half-width
/// `radius_scale` centered at full-scale
/// `(i*(radius_scale+1) + radius_scale, j*(radius_scale+1) + radius_scale)`;
/// adjacent windows overlap but exclude each other's centers. The window
/// value is the mean of all intensities not exceeding the window's plain
/// mean, so dark structures survive blur and lashes while bright ground is
/// ignored. Windows are clipped at the image border; all arithmetic is
/// integer-exact.
pub fn downscale_dark_mean(img: &GrayImage, radius_scale: usize) -> Result<GrayImage, CoarseError> {
    if radius_scale == 0 {
        return Err(CoarseError::BadParameter("radius_scale must be >= 1".into()));
    }
    let (w, h) = (img.width(), img.height());
    let window = 2 * radius_scale + 1;
    if w < window || h < window {
        return Err(CoarseError::TooSmall(format!(
            "{w}x{h} image cannot hold one {window}x{window} window"
        )));
    }
    let step = radius_scale + 1;
    let out_w = (w - 1 - radius_scale) / step + 1;
    let out_h = (h - 1 - radius_scale) / step + 1;
    let mut out = GrayImage::filled(out_w, out_h, 0);

    for j in 0..out_h {
        let cy = j * step + radius_scale;
        let y0 = cy - radius_scale;
        let y1 = (cy + radius_scale).min(h - 1);
        for i in 0..out_w {
            let cx = i * step + radius_scale;
            let x0 = cx - radius_scale;
            let x1 = (cx + radius_scale).min(w - 1);

            let mut sum: u64 = 0;
            let mut count: u64 = 0;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    sum += img.get(x, y) as u64;
                    count += 1;
                }
            }
            // v <= mean  <=>  v * count <= sum, exactly, in integers.
            let mut low_sum: u64 = 0;
            let mut low_count: u64 = 0;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let v = img.get(x, y) as u64;
                    if v * count <= sum {
                        low_sum += v;
                        low_count += 1;
                    }
                }
            }
            // Round half-up of low_sum / low_count without leaving integers.
            let value = (2 * low_sum + low_count) / (2 * low_count);
            out.set(i, j, value as u8);
        }
    }
    Ok(out)
}

/// Build the circular mean and surface-difference kernels for a filter
/// radius. The stencil side is `2*radius_filter + 1`; disk membership is
/// decided by center distance.
pub fn build_kernels(radius_filter: usize) -> CircularKernels {
    let r = radius_filter.max(1);
    let side = 2 * r + 1;
    let center = r as f64;
    let inner_radius = r as f64 / 2.0;

    let mut disk = vec![false; side * side];
    let mut inner = vec![false; side * side];
    let (mut n_disk, mut n_inner, mut n_ring) = (0usize, 0usize, 0usize);
    for y in 0..side {
        for x in 0..side {
            let d = ((x as f64 - center).powi(2) + (y as f64 - center).powi(2)).sqrt();
            if d <= r as f64 {
                disk[y * side + x] = true;
                n_disk += 1;
                if d <= inner_radius {
                    inner[y * side + x] = true;
                    n_inner += 1;
                } else {
                    n_ring += 1;
                }
            }
        }
    }

    let mut mean_w = vec![0.0; side * side];
    let mut surf_w = vec![0.0; side * side];
    for idx in 0..side * side {
        if disk[idx] {
            mean_w[idx] = 1.0 / n_disk as f64;
            surf_w[idx] = if inner[idx] {
                -1.0 / n_inner as f64
            } else {
                1.0 / n_ring as f64
            };
        }
    }

    CircularKernels {
        mean_kernel: Kernel {
            side,
            weights: mean_w,
        },
        surface_kernel: Kernel {
            side,
            weights: surf_w,
        },
        radius_filter: r,
    }
}

/// Same-size correlation with clamp-to-edge borders. Replicated borders
/// keep the image rim from reading as a spurious dark blob.
pub fn convolve(img: &FloatImage, kernel: &Kernel) -> Result<FloatImage, CoarseError> {
    let (w, h) = (img.width, img.height);
    let side = kernel.side;
    if side > w || side > h {
        return Err(CoarseError::TooSmall(format!(
            "kernel side {side} exceeds image {w}x{h}"
        )));
    }
    let half = (side / 2) as i64;
    let mut out = FloatImage::new(w, h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = 0.0;
            for ky in 0..side as i64 {
                let sy = (y + ky - half).clamp(0, h as i64 - 1) as usize;
                for kx in 0..side as i64 {
                    let sx = (x + kx - half).clamp(0, w as i64 - 1) as usize;
                    acc += kernel.get(kx as usize, ky as usize) * img.get(sx, sy);
                }
            }
            out.set(x as usize, y as usize, acc);
        }
    }
    Ok(out)
}

/// All three response maps of the fallback path, retained for debugging.
#[derive(Debug, Clone)]
pub struct CoarseResponses {
    pub surface: FloatImage,
    pub mean: FloatImage,
    /// `surface * (255 - mean)`, the map whose maximum is the coarse hit.
    pub product: FloatImage,
}

/// Convolve the downscaled image with both filters and weight the surface
/// response by the inverted mean response. The mean response of 8-bit data
/// stays within [0, 255], so `255 - mean` makes dark regions heavy.
pub fn coarse_responses(
    small: &GrayImage,
    kernels: &CircularKernels,
) -> Result<CoarseResponses, CoarseError> {
    let f = FloatImage::from_gray(small);
    let surface = convolve(&f, &kernels.surface_kernel)?;
    let mean = convolve(&f, &kernels.mean_kernel)?;
    let mut product = FloatImage::new(f.width, f.height);
    for i in 0..f.data.len() {
        product.data[i] = surface.data[i] * (255.0 - mean.data[i]);
    }
    Ok(CoarseResponses {
        surface,
        mean,
        product,
    })
}

/// Position and value of the strongest response; first occurrence in
/// row-major order wins ties.
pub fn select_coarse_position(responses: &CoarseResponses) -> ((usize, usize), f64) {
    select_coarse_position_in(responses, None)
}

/// As [`select_coarse_position`], but restricted to downscaled positions
/// whose full-scale window center lies inside the processing region, so
/// the border exclusion carries through the fallback path.
pub fn select_coarse_position_in(
    responses: &CoarseResponses,
    region: Option<(&Region, usize)>,
) -> ((usize, usize), f64) {
    let p = &responses.product;
    let mut best = ((0usize, 0usize), f64::NEG_INFINITY);
    for y in 0..p.height {
        for x in 0..p.width {
            if let Some((region, radius_scale)) = region {
                let step = radius_scale + 1;
                if !region.contains(x * step + radius_scale, y * step + radius_scale) {
                    continue;
                }
            }
            let v = p.get(x, y);
            if v > best.1 {
                best = ((x, y), v);
            }
        }
    }
    best
}

/// Map a downscaled coordinate back to its window center on the full-scale
/// image, clipped to bounds.
pub fn upscale_position(
    p: (usize, usize),
    radius_scale: usize,
    img_w: usize,
    img_h: usize,
) -> (usize, usize) {
    let step = radius_scale + 1;
    (
        (p.0 * step + radius_scale).min(img_w.saturating_sub(1)),
        (p.1 * step + radius_scale).min(img_h.saturating_sub(1)),
    )
}

/// Refine a coarse hit to the center of mass of the dark pixels around it.
///
/// The threshold is the coarse pixel's intensity plus its absolute
/// difference to the mean of the surrounding neighborhood box; pixels at or
/// below it inside the window of half-extent `radius_filter^2` are
/// averaged. The coarse point itself always qualifies, so the fallback of
/// returning the coarse position untouched only guards extreme clipping.
pub fn optimize_position(
    img: &GrayImage,
    coarse: (usize, usize),
    radius_filter: usize,
    size_neighbourhood: usize,
) -> (f64, f64) {
    let (cx, cy) = coarse;
    let center_val = img.get(cx, cy) as f64;
    let nb = size_neighbourhood as i64;
    let mean = img
        .mean_in_rect(
            cx as i64 - nb,
            cy as i64 - nb,
            cx as i64 + nb,
            cy as i64 + nb,
        )
        .unwrap_or(center_val);
    let threshold = center_val + (mean - center_val).abs();

    let half = (radius_filter * radius_filter) as i64;
    let x0 = (cx as i64 - half).max(0) as usize;
    let y0 = (cy as i64 - half).max(0) as usize;
    let x1 = (cx as i64 + half).min(img.width() as i64 - 1) as usize;
    let y1 = (cy as i64 + half).min(img.height() as i64 - 1) as usize;

    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut count = 0usize;
    for y in y0..=y1 {
        for x in x0..=x1 {
            if img.get(x, y) as f64 <= threshold {
                sum_x += x as f64;
                sum_y += y as f64;
                count += 1;
            }
        }
    }
    if count == 0 {
        return (cx as f64, cy as f64);
    }
    (sum_x / count as f64, sum_y / count as f64)
}

/// Validate a refined position by the same surround-contrast screen used
/// for ellipse candidates. The box half-extent is `radius_filter^2` in the
/// literal reading and `radius_filter` in the compact one.
pub fn validate_position(
    img: &GrayImage,
    p: (f64, f64),
    radius_filter: usize,
    validity_threshold: f64,
    literal_box: bool,
) -> (bool, f64) {
    let half = if literal_box {
        (radius_filter * radius_filter) as f64
    } else {
        radius_filter as f64
    };
    surface_difference_validity(img, p, half, half, validity_threshold)
}
