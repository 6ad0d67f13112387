//! Dataset ingestion: images paired with hand-labeled pupil centers.
//!
//! The canonical ground-truth format is a UTF-8 CSV with one header line
//! `filename,x,y` and decimal pixel coordinates. Rows with empty
//! coordinates mark images that contain no pupil (blinks); they take part
//! in false-positive accounting instead of the rate curve. A converter
//! turns whitespace-separated annotation files into this format.

use std::fmt;
use std::path::Path;

use pupil_core::{load_gray_image, GrayImage};

/// One hand-labeled record.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord {
    pub filename: String,
    /// Absent for images without a pupil.
    pub center: Option<(f64, f64)>,
}

/// A loaded dataset: every record paired with its image.
#[derive(Debug)]
pub struct Dataset {
    pub name: String,
    pub pairs: Vec<(GrayImage, GroundTruthRecord)>,
    /// Records dropped because their image was missing, unreadable or the
    /// label fell outside the image bounds.
    pub skipped: usize,
    pub warnings: Vec<String>,
}

/// Errors that make a dataset unusable.
#[derive(Debug)]
pub enum DataError {
    Io(std::io::Error),
    /// Malformed ground truth, with the offending line number.
    Parse { line: usize, message: String },
    /// Nothing left after pairing records with images.
    Empty(String),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Io(e) => write!(f, "i/o error: {e}"),
            DataError::Parse { line, message } => {
                write!(f, "ground truth line {line}: {message}")
            }
            DataError::Empty(msg) => write!(f, "empty dataset: {msg}"),
        }
    }
}

impl std::error::Error for DataError {}

impl From<std::io::Error> for DataError {
    fn from(e: std::io::Error) -> Self {
        DataError::Io(e)
    }
}

/// Parse the canonical `filename,x,y` CSV body.
pub fn parse_gt_csv(text: &str) -> Result<Vec<GroundTruthRecord>, DataError> {
    let mut records = Vec::new();
    let mut lines = text.lines().enumerate();

    let Some((_, header)) = lines.next() else {
        return Err(DataError::Empty("ground truth file has no header".into()));
    };
    let normalized: String = header.split(',').map(str::trim).collect::<Vec<_>>().join(",");
    if !normalized.eq_ignore_ascii_case("filename,x,y") {
        return Err(DataError::Parse {
            line: 1,
            message: format!("expected header `filename,x,y`, got `{header}`"),
        });
    }

    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(DataError::Parse {
                line: line_no,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let center = if fields[1].is_empty() && fields[2].is_empty() {
            None
        } else {
            let x: f64 = fields[1].parse().map_err(|_| DataError::Parse {
                line: line_no,
                message: format!("bad x coordinate `{}`", fields[1]),
            })?;
            let y: f64 = fields[2].parse().map_err(|_| DataError::Parse {
                line: line_no,
                message: format!("bad y coordinate `{}`", fields[2]),
            })?;
            Some((x, y))
        };
        records.push(GroundTruthRecord {
            filename: fields[0].to_string(),
            center,
        });
    }
    if records.is_empty() {
        return Err(DataError::Empty("ground truth has no data rows".into()));
    }
    Ok(records)
}

/// Load a directory of images against a ground-truth CSV. Missing images
/// and out-of-bounds labels are skipped with a warning; zero usable pairs
/// is an error.
pub fn load_dataset(images_dir: &Path, gt_file: &Path) -> Result<Dataset, DataError> {
    let text = std::fs::read_to_string(gt_file)?;
    let records = parse_gt_csv(&text)?;
    let name = images_dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());

    let mut pairs = Vec::with_capacity(records.len());
    let mut warnings = Vec::new();
    for record in records {
        let path = images_dir.join(&record.filename);
        let img = match load_gray_image(&path) {
            Ok(img) => img,
            Err(e) => {
                warnings.push(format!("{}: {e}", record.filename));
                continue;
            }
        };
        if let Some((x, y)) = record.center {
            if x < 0.0 || y < 0.0 || x >= img.width() as f64 || y >= img.height() as f64 {
                warnings.push(format!(
                    "{}: label ({x}, {y}) outside {}x{}",
                    record.filename,
                    img.width(),
                    img.height()
                ));
                continue;
            }
        }
        pairs.push((img, record));
    }
    if pairs.is_empty() {
        return Err(DataError::Empty(format!(
            "no usable image/label pairs under {}",
            images_dir.display()
        )));
    }
    Ok(Dataset {
        name,
        skipped: warnings.len(),
        pairs,
        warnings,
    })
}

/// Load every raster in a directory, sorted by filename. Used by the
/// benchmark command, which needs no labels.
pub fn load_images(images_dir: &Path) -> Result<Vec<(String, GrayImage)>, DataError> {
    let mut names: Vec<String> = std::fs::read_dir(images_dir)?
        .filter_map(|entry| {
            let entry = entry.ok()?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let lower = name.to_ascii_lowercase();
            (lower.ends_with(".pgm") || lower.ends_with(".png")).then_some(name)
        })
        .collect();
    names.sort();
    let mut images = Vec::new();
    for name in names {
        if let Ok(img) = load_gray_image(images_dir.join(&name)) {
            images.push((name, img));
        }
    }
    if images.is_empty() {
        return Err(DataError::Empty(format!(
            "no readable rasters under {}",
            images_dir.display()
        )));
    }
    Ok(images)
}

/// Convert a whitespace-separated annotation file (one record per frame:
/// `frame x y`, extra fields ignored) into the canonical CSV. Frames
/// without an extension get `ext` appended.
pub fn convert_ground_truth(raw: &str, ext: &str) -> Result<String, DataError> {
    let mut out = String::from("filename,x,y\n");
    let mut rows = 0usize;
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(DataError::Parse {
                line: line_no,
                message: format!("expected `frame x y`, got `{line}`"),
            });
        }
        let x: f64 = fields[1].parse().map_err(|_| DataError::Parse {
            line: line_no,
            message: format!("bad x coordinate `{}`", fields[1]),
        })?;
        let y: f64 = fields[2].parse().map_err(|_| DataError::Parse {
            line: line_no,
            message: format!("bad y coordinate `{}`", fields[2]),
        })?;
        let frame = if fields[0].contains('.') {
            fields[0].to_string()
        } else {
            format!("{}.{ext}", fields[0])
        };
        out.push_str(&format!("{frame},{x},{y}\n"));
        rows += 1;
    }
    if rows == 0 {
        return Err(DataError::Empty("no records in raw annotation file".into()));
    }
    Ok(out)
}
