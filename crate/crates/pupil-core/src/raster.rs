//! Grayscale raster types, PGM I/O, contrast normalization and the
//! border-exclusion region.
//!
//! Coordinate convention: origin top-left, x rightward, y downward.
//! All pixel data is stored row-major.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// Errors raised by raster loading and construction.
#[derive(Debug)]
pub enum RasterError {
    Io(io::Error),
    /// Malformed or unsupported file contents (bad magic, non-8-bit depth,
    /// truncated payload).
    Format(String),
    /// Dimensions and payload length disagree.
    Size(String),
}

impl fmt::Display for RasterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RasterError::Io(e) => write!(f, "i/o error: {e}"),
            RasterError::Format(msg) => write!(f, "format error: {msg}"),
            RasterError::Size(msg) => write!(f, "size error: {msg}"),
        }
    }
}

impl std::error::Error for RasterError {}

impl From<io::Error> for RasterError {
    fn from(e: io::Error) -> Self {
        RasterError::Io(e)
    }
}

impl GrayImage {
    /// Build an image from raw row-major bytes.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        if data.len() != width * height {
            return Err(RasterError::Size(format!(
                "expected {} bytes for {}x{}, got {}",
                width * height,
                width,
                height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x] = v;
    }

    /// Intensity at integer coordinates, or `None` when out of bounds.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> Option<u8> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(self.data[y as usize * self.width + x as usize])
        }
    }

    /// Mean intensity over the pixels of a clipped rectangle, or `None`
    /// when the clipped rectangle is empty. Bounds are inclusive and may
    /// lie outside the image.
    pub fn mean_in_rect(&self, x0: i64, y0: i64, x1: i64, y1: i64) -> Option<f64> {
        let xa = x0.max(0) as usize;
        let ya = y0.max(0) as usize;
        if x1 < xa as i64 || y1 < ya as i64 {
            return None;
        }
        let xb = (x1 as usize).min(self.width.wrapping_sub(1));
        let yb = (y1 as usize).min(self.height.wrapping_sub(1));
        if self.width == 0 || self.height == 0 || xa > xb || ya > yb {
            return None;
        }
        let mut sum: u64 = 0;
        for y in ya..=yb {
            let row = &self.data[y * self.width + xa..=y * self.width + xb];
            sum += row.iter().map(|&v| v as u64).sum::<u64>();
        }
        let count = (xb - xa + 1) * (yb - ya + 1);
        Some(sum as f64 / count as f64)
    }
}

/// Inclusive rectangular processing region in full-image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl Region {
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }
}

/// Binary edge map with the same dimensions as its source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl EdgeImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    /// Edge test tolerating out-of-bounds coordinates (treated as clear).
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            false
        } else {
            self.bits[y as usize * self.width + x as usize]
        }
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of set pixels in the 8-neighborhood of (x, y).
    pub fn neighbor_count(&self, x: usize, y: usize) -> usize {
        let mut n = 0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                if self.get_checked(x as i64 + dx, y as i64 + dy) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Render as a gray image (255 = edge, 0 = clear) for debug dumps.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }
}

/// Round half-up for non-negative values; the single float-to-intensity
/// rounding rule used throughout the crate.
#[inline]
pub fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Load a binary PGM (P5, maxval 255). With the `png` feature enabled,
/// `.png` files holding 8-bit grayscale data are accepted as well.
pub fn load_gray_image<P: AsRef<Path>>(path: P) -> Result<GrayImage, RasterError> {
    let path = path.as_ref();
    #[cfg(feature = "png")]
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        return load_png(path);
    }
    let bytes = fs::read(path)?;
    parse_pgm(&bytes)
}

/// Parse a binary PGM byte stream.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, RasterError> {
    fn skip_ws_and_comments(bytes: &[u8], pos: &mut usize) {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn read_uint(bytes: &[u8], pos: &mut usize) -> Result<usize, RasterError> {
        skip_ws_and_comments(bytes, pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            return Err(RasterError::Format("expected integer in PGM header".into()));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| RasterError::Format("bad integer in PGM header".into()))
    }

    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(RasterError::Format("not a binary PGM (missing P5 magic)".into()));
    }
    let mut pos = 2usize;
    let width = read_uint(bytes, &mut pos)?;
    let height = read_uint(bytes, &mut pos)?;
    let maxval = read_uint(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(RasterError::Format(format!(
            "unsupported PGM maxval {maxval}; only 8-bit (255) rasters are accepted"
        )));
    }
    if width == 0 || height == 0 {
        return Err(RasterError::Format("zero-sized PGM".into()));
    }
    // Single whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(RasterError::Format("missing separator before PGM payload".into()));
    }
    pos += 1;
    let need = width * height;
    if bytes.len() < pos + need {
        return Err(RasterError::Format(format!(
            "truncated PGM payload: need {need} bytes, have {}",
            bytes.len() - pos
        )));
    }
    GrayImage::from_raw(width, height, bytes[pos..pos + need].to_vec())
}

/// Write a binary PGM (P5, maxval 255).
pub fn save_pgm<P: AsRef<Path>>(img: &GrayImage, path: P) -> Result<(), RasterError> {
    let mut out = Vec::with_capacity(img.data.len() + 32);
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.extend_from_slice(&img.data);
    fs::write(path, out)?;
    Ok(())
}

#[cfg(feature = "png")]
fn load_png(path: &Path) -> Result<GrayImage, RasterError> {
    let file = fs::File::open(path)?;
    let decoder = png::Decoder::new(io::BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| RasterError::Format(format!("png: {e}")))?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| RasterError::Format(format!("png: {e}")))?;
    if info.bit_depth != png::BitDepth::Eight || info.color_type != png::ColorType::Grayscale {
        return Err(RasterError::Format(
            "png must be 8-bit grayscale".into(),
        ));
    }
    buf.truncate(info.buffer_size());
    GrayImage::from_raw(info.width as usize, info.height as usize, buf)
}

/// Linear contrast stretch mapping the observed [min, max] onto [0, 255],
/// rounding half-up. Constant images are returned unchanged.
pub fn normalize(img: &GrayImage) -> GrayImage {
    let Some(&min) = img.data.iter().min() else {
        return img.clone();
    };
    let max = *img.data.iter().max().unwrap();
    if min == max {
        return img.clone();
    }
    let span = (max - min) as f64;
    let data = img
        .data
        .iter()
        .map(|&v| round_half_up((v - min) as f64 * 255.0 / span) as u8)
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Region left after excluding `border_fraction` of each image border.
///
/// Spans [floor(w*f), w-1-floor(w*f)] x [floor(h*f), h-1-floor(h*f)].
pub fn processing_region(img: &GrayImage, border_fraction: f64) -> Result<Region, RasterError> {
    if !(0.0..0.5).contains(&border_fraction) {
        return Err(RasterError::Size(format!(
            "border fraction {border_fraction} outside [0, 0.5)"
        )));
    }
    let bx = (img.width as f64 * border_fraction).floor() as usize;
    let by = (img.height as f64 * border_fraction).floor() as usize;
    Ok(Region {
        x_min: bx,
        y_min: by,
        x_max: img.width - 1 - bx,
        y_max: img.height - 1 - by,
    })
}
