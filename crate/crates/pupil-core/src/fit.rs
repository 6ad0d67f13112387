//! Direct least-squares ellipse fitting.
//!
//! One-shot conic fit with an ellipse-specific constraint, solved as a
//! reduced 3x3 generalized eigenproblem. No iteration, which keeps the
//! per-line cost flat and the pipeline latency predictable.

use nalgebra::{Matrix3, Vector3};
use std::fmt;

/// Geometric ellipse parameters, sub-pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParams {
    pub center_x: f64,
    pub center_y: f64,
    /// Semi-major radius; always >= `radius_minor` > 0.
    pub radius_major: f64,
    pub radius_minor: f64,
    /// Major-axis direction in radians, normalized to [0, pi).
    pub angle: f64,
}

impl EllipseParams {
    /// |major - minor|, the elongation term of the candidate rating.
    pub fn radius_spread(&self) -> f64 {
        self.radius_major - self.radius_minor
    }

    /// Half-extents of the axis-aligned bounding rectangle.
    pub fn bounding_half_extents(&self) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        let a = self.radius_major;
        let b = self.radius_minor;
        let hx = ((a * c).powi(2) + (b * s).powi(2)).sqrt();
        let hy = ((a * s).powi(2) + (b * c).powi(2)).sqrt();
        (hx, hy)
    }

    /// Boundary point at parameter `t` (radians).
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        let (st, ct) = t.sin_cos();
        let (s, c) = self.angle.sin_cos();
        let px = self.radius_major * ct;
        let py = self.radius_minor * st;
        (
            self.center_x + c * px - s * py,
            self.center_y + s * px + c * py,
        )
    }
}

/// Reasons an ellipse fit can fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitError {
    TooFewPoints { needed: usize, got: usize },
    /// Collinear or otherwise degenerate input; no valid ellipse exists.
    Degenerate,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::TooFewPoints { needed, got } => {
                write!(f, "too few points for an ellipse fit: need {needed}, got {got}")
            }
            FitError::Degenerate => write!(f, "degenerate point configuration"),
        }
    }
}

impl std::error::Error for FitError {}

/// Fit an ellipse to the given points.
///
/// The conic `a x^2 + b xy + c y^2 + d x + e y + f = 0` minimizing the
/// algebraic residual subject to `4ac - b^2 = 1` is found by splitting the
/// scatter matrix into quadratic and linear blocks and solving the reduced
/// eigenproblem; the constraint guarantees the solution is an ellipse
/// whenever one exists. Input points are shifted and scaled before the
/// solve so the result is stable and translation-invariant.
pub fn fit_ellipse_lsq(points: &[(f64, f64)]) -> Result<EllipseParams, FitError> {
    if points.len() < 5 {
        return Err(FitError::TooFewPoints {
            needed: 5,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| ((p.0 - mx).powi(2) + (p.1 - my).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if mean_dist <= f64::EPSILON {
        return Err(FitError::Degenerate);
    }
    let scale = std::f64::consts::SQRT_2 / mean_dist;

    // Scatter blocks over the normalized design [x^2, xy, y^2 | x, y, 1].
    let mut s1 = Matrix3::zeros();
    let mut s2 = Matrix3::zeros();
    let mut s3 = Matrix3::zeros();
    for &(px, py) in points {
        let x = (px - mx) * scale;
        let y = (py - my) * scale;
        let q = Vector3::new(x * x, x * y, y * y);
        let l = Vector3::new(x, y, 1.0);
        s1 += q * q.transpose();
        s2 += q * l.transpose();
        s3 += l * l.transpose();
    }
    let s3_inv = s3.try_inverse().ok_or(FitError::Degenerate)?;
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;

    // Constraint matrix inverse for 4ac - b^2:
    //   C = [[0,0,2],[0,-1,0],[2,0,0]],  C^-1 = [[0,0,1/2],[0,-1,0],[1/2,0,0]]
    let reduced = Matrix3::new(
        m[(2, 0)] / 2.0,
        m[(2, 1)] / 2.0,
        m[(2, 2)] / 2.0,
        -m[(1, 0)],
        -m[(1, 1)],
        -m[(1, 2)],
        m[(0, 0)] / 2.0,
        m[(0, 1)] / 2.0,
        m[(0, 2)] / 2.0,
    );

    let quad = eigenvector_with_ellipse_constraint(&reduced).ok_or(FitError::Degenerate)?;
    let lin = t * quad;

    // Geometric conversion happens in the normalized frame; only the
    // center and radii need un-scaling afterwards.
    let conic = [quad[0], quad[1], quad[2], lin[0], lin[1], lin[2]];
    let el = conic_to_geometry(conic).ok_or(FitError::Degenerate)?;
    let recovered = EllipseParams {
        center_x: el.center_x / scale + mx,
        center_y: el.center_y / scale + my,
        radius_major: el.radius_major / scale,
        radius_minor: el.radius_minor / scale,
        angle: el.angle,
    };
    if !recovered.radius_major.is_finite()
        || !recovered.center_x.is_finite()
        || !recovered.center_y.is_finite()
        || recovered.radius_minor <= 0.0
    {
        return Err(FitError::Degenerate);
    }
    Ok(recovered)
}

/// Real eigenvector of the reduced system satisfying `4ac - b^2 > 0`.
fn eigenvector_with_ellipse_constraint(a: &Matrix3<f64>) -> Option<Vector3<f64>> {
    // Characteristic polynomial x^3 + c2 x^2 + c1 x + c0.
    let trace = a[(0, 0)] + a[(1, 1)] + a[(2, 2)];
    let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
        + a[(0, 0)] * a[(2, 2)]
        - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)]
        - a[(1, 2)] * a[(2, 1)];
    let det = a.determinant();
    let roots = cubic_real_roots(-trace, minors, -det);

    let mut best: Option<(f64, Vector3<f64>)> = None;
    for lambda in roots {
        let shifted = a - Matrix3::identity() * lambda;
        let Some(v) = null_vector(&shifted) else {
            continue;
        };
        let constraint = 4.0 * v[0] * v[2] - v[1] * v[1];
        if constraint > 0.0 {
            // Normalize the constraint to 1 for a well-scaled conic.
            let scaled = v / constraint.sqrt();
            let keep = match &best {
                None => true,
                Some((c, _)) => constraint > *c,
            };
            if keep {
                best = Some((constraint, scaled));
            }
        }
    }
    best.map(|(_, v)| v)
}

/// Real roots of x^3 + a2 x^2 + a1 x + a0.
fn cubic_real_roots(a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
    let shift = -a2 / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-q / 2.0 + s).cbrt();
        let v = (-q / 2.0 - s).cbrt();
        vec![shift + u + v]
    } else if p.abs() <= f64::EPSILON {
        vec![shift]
    } else {
        let r = (-p / 3.0).sqrt();
        let phi = (-q / (2.0 * r.powi(3))).clamp(-1.0, 1.0).acos();
        (0..3)
            .map(|k| {
                shift + 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos()
            })
            .collect()
    }
}

/// Null-space vector via the largest cross product of row pairs.
fn null_vector(m: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let r0 = Vector3::new(m[(0, 0)], m[(0, 1)], m[(0, 2)]);
    let r1 = Vector3::new(m[(1, 0)], m[(1, 1)], m[(1, 2)]);
    let r2 = Vector3::new(m[(2, 0)], m[(2, 1)], m[(2, 2)]);
    let candidates = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let best = candidates
        .into_iter()
        .max_by(|a, b| a.norm_squared().partial_cmp(&b.norm_squared()).unwrap())?;
    if best.norm_squared() <= f64::EPSILON * f64::EPSILON {
        return None;
    }
    Some(best.normalize())
}

/// Convert conic coefficients to center/radii/angle form. Returns `None`
/// for non-ellipses and degenerate configurations rather than clamping;
/// a clamped conversion would fabricate candidates.
fn conic_to_geometry(c: [f64; 6]) -> Option<EllipseParams> {
    let [a, b, cc, d, e, f] = c;
    let disc = b * b - 4.0 * a * cc;
    if disc >= 0.0 {
        return None;
    }
    let denom = -disc;
    let cx = (b * e - 2.0 * cc * d) / denom;
    let cy = (b * d - 2.0 * a * e) / denom;

    // Conic value at the center.
    let fc = a * cx * cx + b * cx * cy + cc * cy * cy + d * cx + e * cy + f;
    if fc.abs() <= f64::EPSILON {
        return None;
    }

    let sum = a + cc;
    let diff = ((a - cc).powi(2) + b * b).sqrt();
    let lambda_min = (sum - diff) / 2.0;
    let lambda_max = (sum + diff) / 2.0;

    let major_sq = -fc / lambda_min;
    let minor_sq = -fc / lambda_max;
    if major_sq <= 0.0 || minor_sq <= 0.0 {
        return None;
    }

    // Major axis direction = eigenvector of the smaller eigenvalue.
    let angle = if b.abs() <= f64::EPSILON {
        if a <= cc {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        }
    } else {
        (2.0 * (lambda_min - a)).atan2(b)
    };
    let angle = angle.rem_euclid(std::f64::consts::PI);

    Some(EllipseParams {
        center_x: cx,
        center_y: cy,
        radius_major: major_sq.sqrt(),
        radius_minor: minor_sq.sqrt(),
        angle,
    })
}
