//! Detection-rate curves over integer pixel-error thresholds.

use crate::dataset::DataError;

/// Detection rate per integer pixel error, 0 through `max_error`
/// inclusive. Rates are monotone non-decreasing in the error by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub name: String,
    /// Number of labeled images behind the curve.
    pub images: usize,
    pub rates: Vec<f64>,
}

impl RateCurve {
    /// Build from per-image errors; `None` marks a failed detection,
    /// which counts at no threshold. The comparison is inclusive: an
    /// error of exactly `e` pixels counts as detected at `e`.
    pub fn from_errors(name: impl Into<String>, errors: &[Option<f64>], max_error: usize) -> Self {
        let n = errors.len().max(1);
        let rates = (0..=max_error)
            .map(|e| {
                let hits = errors
                    .iter()
                    .filter(|err| err.is_some_and(|v| v <= e as f64))
                    .count();
                hits as f64 / n as f64
            })
            .collect();
        Self {
            name: name.into(),
            images: errors.len(),
            rates,
        }
    }

    pub fn max_error(&self) -> usize {
        self.rates.len().saturating_sub(1)
    }

    pub fn rate_at(&self, error_px: usize) -> f64 {
        self.rates
            .get(error_px)
            .copied()
            .unwrap_or_else(|| self.rates.last().copied().unwrap_or(0.0))
    }
}

/// Combine per-dataset curves. Weighted pools images across datasets;
/// unweighted averages the rates with every dataset counting equally.
pub fn aggregate(curves: &[RateCurve], weighted: bool) -> Result<RateCurve, DataError> {
    if curves.is_empty() {
        return Err(DataError::Empty("nothing to aggregate".into()));
    }
    let max_error = curves.iter().map(RateCurve::max_error).min().unwrap();
    let total_images: usize = curves.iter().map(|c| c.images).sum();
    let rates = (0..=max_error)
        .map(|e| {
            if weighted {
                let pooled: f64 = curves
                    .iter()
                    .map(|c| c.rate_at(e) * c.images as f64)
                    .sum();
                pooled / total_images.max(1) as f64
            } else {
                curves.iter().map(|c| c.rate_at(e)).sum::<f64>() / curves.len() as f64
            }
        })
        .collect();
    Ok(RateCurve {
        name: if weighted { "weighted" } else { "unweighted" }.to_string(),
        images: total_images,
        rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_from_errors_counts_inclusively() {
        let errors = [Some(0.0), Some(3.0), Some(6.0)];
        let c = RateCurve::from_errors("t", &errors, 15);
        assert_eq!(c.rate_at(5), 2.0 / 3.0);
        assert_eq!(c.rate_at(6), 1.0);
        assert_eq!(c.rate_at(2), 1.0 / 3.0);
        assert_eq!(c.rates.len(), 16);
    }

    #[test]
    fn failures_count_nowhere() {
        let errors = [Some(1.0), None, None];
        let c = RateCurve::from_errors("t", &errors, 15);
        assert_eq!(c.rate_at(15), 1.0 / 3.0);
    }

    #[test]
    fn exact_detections_saturate() {
        let errors = [Some(0.0); 5];
        let c = RateCurve::from_errors("t", &errors, 15);
        assert!(c.rates.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn curves_are_monotone() {
        let errors: Vec<Option<f64>> = (0..40)
            .map(|i| if i % 5 == 0 { None } else { Some(i as f64 * 0.7) })
            .collect();
        let c = RateCurve::from_errors("t", &errors, 15);
        for pair in c.rates.windows(2) {
            assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn aggregate_single_curve_is_identity() {
        let c = RateCurve::from_errors("t", &[Some(1.0), Some(9.0)], 15);
        let w = aggregate(std::slice::from_ref(&c), true).unwrap();
        let u = aggregate(std::slice::from_ref(&c), false).unwrap();
        assert_eq!(w.rates, c.rates);
        assert_eq!(u.rates, c.rates);
    }

    #[test]
    fn aggregate_weighted_vs_unweighted_example() {
        // Sizes 100 and 300 with rates 1.0 and 0.5 at every threshold:
        // pooled counts give 0.625, the plain mean gives 0.75.
        let a = RateCurve {
            name: "a".into(),
            images: 100,
            rates: vec![1.0; 16],
        };
        let b = RateCurve {
            name: "b".into(),
            images: 300,
            rates: vec![0.5; 16],
        };
        let w = aggregate(&[a.clone(), b.clone()], true).unwrap();
        let u = aggregate(&[a, b], false).unwrap();
        assert!((w.rate_at(5) - 0.625).abs() < 1e-12);
        assert!((u.rate_at(5) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn aggregate_equal_curves_is_any_input() {
        let c = RateCurve::from_errors("t", &[Some(2.0), Some(7.0), None], 15);
        let mut b = c.clone();
        b.name = "other".into();
        let w = aggregate(&[c.clone(), b.clone()], true).unwrap();
        let u = aggregate(&[c.clone(), b], false).unwrap();
        for e in 0..=15 {
            assert!((w.rate_at(e) - c.rate_at(e)).abs() < 1e-12);
            assert!((u.rate_at(e) - c.rate_at(e)).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_equal_sizes_weighted_matches_unweighted() {
        let a = RateCurve::from_errors("a", &[Some(1.0), Some(4.0), None], 15);
        let b = RateCurve::from_errors("b", &[Some(2.0), None, Some(0.5)], 15);
        let w = aggregate(&[a.clone(), b.clone()], true).unwrap();
        let u = aggregate(&[a, b], false).unwrap();
        for e in 0..=15 {
            assert!((w.rate_at(e) - u.rate_at(e)).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_empty_is_error() {
        assert!(aggregate(&[], true).is_err());
    }
}
