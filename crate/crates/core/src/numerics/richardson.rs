//! Extrapolation of ε^{-p}·value(ε) to ε → 0 from a geometric ε ladder.
//!
//! The leading correction exponent is not assumed: each pass estimates the
//! contraction ratio of successive differences at the fine end of the ladder
//! and eliminates that power, Aitken style, before the next pass.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub error_estimate: f64,
    /// Correction exponents eliminated, finest pass last.
    pub passes: usize,
}

/// Extrapolates value/ε^exponent to ε → 0. Needs at least three samples with
/// geometrically decreasing ε.
pub fn richardson_limit(samples: &[(f64, f64)], exponent: f64) -> Result<Extrapolation> {
    if samples.len() < 3 {
        return Err(Error::Extrapolation(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|a, b| b.0.total_cmp(&a.0));
    if s.iter().any(|&(e, v)| !(e > 0.0) || !v.is_finite()) {
        return Err(Error::Extrapolation("ε must be positive and values finite".into()));
    }
    let ratio = s[0].0 / s[1].0;
    for w in s.windows(2) {
        let r = w[0].0 / w[1].0;
        if !(r > 1.0) || (r - ratio).abs() > 1e-8 * ratio {
            return Err(Error::Extrapolation("ε ladder is not geometric".into()));
        }
    }
    let mut col: Vec<f64> = s.iter().map(|&(e, v)| v / e.powf(exponent)).collect();
    let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut prev_last = *col.last().unwrap();
    let mut passes = 0;
    while col.len() >= 3 {
        let m = col.len();
        let d1 = col[m - 2] - col[m - 1];
        let d0 = col[m - 3] - col[m - 2];
        if d1.abs() <= 1e-13 * scale {
            break;
        }
        let rho = d0 / d1;
        if !(rho > 1.0 + 1e-9) {
            if passes == 0 {
                return Err(Error::Extrapolation(format!(
                    "differences do not contract (ratio {rho:.4}); the sequence is not converging"
                )));
            }
            break;
        }
        prev_last = col[m - 1];
        col = col.windows(2).map(|w| w[1] + (w[1] - w[0]) / (rho - 1.0)).collect();
        passes += 1;
    }
    let m = col.len();
    let limit = col[m - 1];
    let spread = if m >= 2 { (col[m - 1] - col[m - 2]).abs() } else { 0.0 };
    let error_estimate = (limit - prev_last).abs() + spread + 1e-14 * scale;
    Ok(Extrapolation { limit, error_estimate, passes })
}
