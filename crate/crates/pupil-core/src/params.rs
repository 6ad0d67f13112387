//! Detector configuration.
//!
//! Every tunable of the pipeline lives here with its default. Defaults are
//! chosen so one fixed setting works across datasets; sensitivity
//! experiments vary exactly one field at a time (see the `set` method used
//! by the sweep harness).

use std::fmt;

/// All pipeline tunables.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    /// Fraction of each image border excluded from processing.
    pub border_fraction: f64,
    /// Gaussian sigma of the Canny smoothing stage.
    pub canny_sigma: f64,
    /// Percentile (0..1) of nonzero gradient magnitudes used as the high
    /// hysteresis threshold. Must sit above the sensor-noise mass; real
    /// edges occupy the top few percent of magnitudes.
    pub canny_percentile: f64,
    /// Low hysteresis threshold as a fraction of the high one.
    pub canny_low_ratio: f64,
    /// Absolute floor for the high hysteresis threshold, in gradient
    /// magnitude units of the contrast-normalized image.
    pub canny_min_high: f64,
    /// Use the curvature-consistency line splitter instead of the
    /// orthogonal-break masks (slower, kept for experimentation).
    pub use_algorithmic_split: bool,
    /// Minimum distance (px) from a line's centroid to its nearest pixel
    /// for the line to count as curved.
    pub min_mean_line_dist: f64,
    /// Minimum number of points for a line to be considered at all.
    pub min_line_length: usize,
    /// Maximum allowed major/minor radius ratio of a candidate ellipse.
    pub radii_ratio: f64,
    /// Minimum ellipse area as a fraction of the image area.
    pub min_area: f64,
    /// Maximum ellipse area as a fraction of the image area.
    pub max_area: f64,
    /// Minimum surround-minus-interior intensity difference for a
    /// candidate to be accepted as a pupil.
    pub validity_threshold: f64,
    /// First scale factor of the interior sampling walk.
    pub shrink_start: f64,
    /// Last scale factor of the interior sampling walk.
    pub shrink_end: f64,
    /// Step between consecutive scale factors.
    pub shrink_step: f64,
    /// Half-width of the downscaling window; adjacent output pixels are
    /// `radius_scale + 1` full-scale pixels apart.
    pub radius_scale: usize,
    /// Pixel distance in each direction of the neighborhood used to derive
    /// the refinement threshold.
    pub size_neighbourhood: usize,
    /// Validation box half-extent: `radius_filter^2` when true (literal
    /// reading), `radius_filter` when false (compact reading).
    pub validation_box_literal: bool,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            border_fraction: 0.10,
            canny_sigma: 1.4,
            canny_percentile: 0.95,
            canny_low_ratio: 0.4,
            canny_min_high: 90.0,
            use_algorithmic_split: false,
            min_mean_line_dist: 3.0,
            min_line_length: 5,
            radii_ratio: 3.0,
            min_area: 0.005,
            max_area: 0.10,
            validity_threshold: 10.0,
            shrink_start: 0.95,
            shrink_end: 0.80,
            shrink_step: 0.01,
            radius_scale: 5,
            size_neighbourhood: 2,
            validation_box_literal: true,
        }
    }
}

/// Error raised when setting or validating parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamError {
    UnknownField(String),
    BadValue { field: String, value: String },
    Invalid(String),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::UnknownField(name) => write!(f, "unknown parameter `{name}`"),
            ParamError::BadValue { field, value } => {
                write!(f, "cannot parse `{value}` for parameter `{field}`")
            }
            ParamError::Invalid(msg) => write!(f, "invalid parameters: {msg}"),
        }
    }
}

impl std::error::Error for ParamError {}

impl DetectorParams {
    /// Names of all settable fields, in declaration order.
    pub fn field_names() -> &'static [&'static str] {
        &[
            "border_fraction",
            "canny_sigma",
            "canny_percentile",
            "canny_low_ratio",
            "canny_min_high",
            "use_algorithmic_split",
            "min_mean_line_dist",
            "min_line_length",
            "radii_ratio",
            "min_area",
            "max_area",
            "validity_threshold",
            "shrink_start",
            "shrink_end",
            "shrink_step",
            "radius_scale",
            "size_neighbourhood",
            "validation_box_literal",
        ]
    }

    /// Set one field from its textual representation.
    pub fn set(&mut self, field: &str, value: &str) -> Result<(), ParamError> {
        fn parse<T: std::str::FromStr>(field: &str, value: &str) -> Result<T, ParamError> {
            value.trim().parse().map_err(|_| ParamError::BadValue {
                field: field.to_string(),
                value: value.to_string(),
            })
        }
        match field {
            "border_fraction" => self.border_fraction = parse(field, value)?,
            "canny_sigma" => self.canny_sigma = parse(field, value)?,
            "canny_percentile" => self.canny_percentile = parse(field, value)?,
            "canny_low_ratio" => self.canny_low_ratio = parse(field, value)?,
            "canny_min_high" => self.canny_min_high = parse(field, value)?,
            "use_algorithmic_split" => self.use_algorithmic_split = parse(field, value)?,
            "min_mean_line_dist" => self.min_mean_line_dist = parse(field, value)?,
            "min_line_length" => self.min_line_length = parse(field, value)?,
            "radii_ratio" => self.radii_ratio = parse(field, value)?,
            "min_area" => self.min_area = parse(field, value)?,
            "max_area" => self.max_area = parse(field, value)?,
            "validity_threshold" => self.validity_threshold = parse(field, value)?,
            "shrink_start" => self.shrink_start = parse(field, value)?,
            "shrink_end" => self.shrink_end = parse(field, value)?,
            "shrink_step" => self.shrink_step = parse(field, value)?,
            "radius_scale" => self.radius_scale = parse(field, value)?,
            "size_neighbourhood" => self.size_neighbourhood = parse(field, value)?,
            "validation_box_literal" => self.validation_box_literal = parse(field, value)?,
            other => return Err(ParamError::UnknownField(other.to_string())),
        }
        Ok(())
    }

    /// Check cross-field invariants.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(0.0..0.5).contains(&self.border_fraction) {
            return Err(ParamError::Invalid("border_fraction must be in [0, 0.5)".into()));
        }
        if !(self.min_area > 0.0 && self.min_area < self.max_area && self.max_area < 1.0) {
            return Err(ParamError::Invalid(
                "need 0 < min_area < max_area < 1".into(),
            ));
        }
        if self.shrink_end >= self.shrink_start || self.shrink_step <= 0.0 {
            return Err(ParamError::Invalid(
                "need shrink_end < shrink_start and shrink_step > 0".into(),
            ));
        }
        if self.radius_scale == 0 {
            return Err(ParamError::Invalid("radius_scale must be >= 1".into()));
        }
        if self.radii_ratio < 1.0 {
            return Err(ParamError::Invalid("radii_ratio must be >= 1".into()));
        }
        if self.validity_threshold < 0.0 || self.min_mean_line_dist < 0.0 {
            return Err(ParamError::Invalid("thresholds must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.canny_percentile)
            || self.canny_low_ratio <= 0.0
            || self.canny_min_high < 0.0
        {
            return Err(ParamError::Invalid("bad Canny thresholds".into()));
        }
        Ok(())
    }

    /// Parse a flat `key=value` config file body. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_config_str(text: &str) -> Result<Self, ParamError> {
        let mut params = Self::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ParamError::Invalid(format!("expected key=value, got `{line}`")))?;
            params.set(key.trim(), value)?;
        }
        params.validate()?;
        Ok(params)
    }

    /// Scale factors of the interior sampling walk, from `shrink_start`
    /// down to `shrink_end` inclusive.
    pub fn shrink_factors(&self) -> Vec<f64> {
        let mut factors = Vec::new();
        let mut k = self.shrink_start;
        while k >= self.shrink_end - 1e-9 {
            factors.push(k);
            k -= self.shrink_step;
        }
        factors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        DetectorParams::default().validate().unwrap();
    }

    #[test]
    fn shrink_walk_has_sixteen_factors() {
        let factors = DetectorParams::default().shrink_factors();
        assert_eq!(factors.len(), 16);
        assert!((factors[0] - 0.95).abs() < 1e-12);
        assert!((factors[15] - 0.80).abs() < 1e-9);
    }

    #[test]
    fn set_by_name_roundtrip() {
        let mut p = DetectorParams::default();
        p.set("radius_scale", "3").unwrap();
        p.set("validity_threshold", "7.5").unwrap();
        p.set("use_algorithmic_split", "true").unwrap();
        assert_eq!(p.radius_scale, 3);
        assert_eq!(p.validity_threshold, 7.5);
        assert!(p.use_algorithmic_split);
        assert!(matches!(
            p.set("no_such_field", "1"),
            Err(ParamError::UnknownField(_))
        ));
        assert!(matches!(
            p.set("radius_scale", "abc"),
            Err(ParamError::BadValue { .. })
        ));
    }

    #[test]
    fn config_text_parses() {
        let text = "# comment\nradius_scale=4\n\nmin_area = 0.01\n";
        let p = DetectorParams::from_config_str(text).unwrap();
        assert_eq!(p.radius_scale, 4);
        assert_eq!(p.min_area, 0.01);
    }

    #[test]
    fn every_field_name_is_settable() {
        let mut p = DetectorParams::default();
        for name in DetectorParams::field_names() {
            let probe = if *name == "use_algorithmic_split" || *name == "validation_box_literal" {
                "true"
            } else {
                "1"
            };
            p.set(name, probe).unwrap();
        }
    }

    #[test]
    fn invalid_combinations_rejected() {
        let p = DetectorParams {
            min_area: 0.5,
            max_area: 0.2,
            ..DetectorParams::default()
        };
        assert!(p.validate().is_err());
    }
}
