//! Real Gauss hypergeometric function ₂F₁(a, b; c; x) for x ≤ 1.
//!
//! Strategy: direct series on [0, 1/2]; Pfaff transformation for x < 0; the
//! 1 − x connection formulas (with the logarithmic cases for integer c − a − b)
//! on (1/2, 1); Gauss's theorem at x = 1.

use super::gamma::{digamma, gamma, rgamma};
use crate::{Error, Result};

const MAX_TERMS: usize = 20_000;
const INTEGER_TOL: f64 = 1e-12;

fn nonpositive_integer(x: f64) -> Option<u32> {
    (x <= 0.0 && (x - x.round()).abs() < INTEGER_TOL && x > -1e6).then(|| (-x.round()) as u32)
}

/// Plain Maclaurin series; valid for |x| < 1 (and any x if it terminates).
fn series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        sum += term;
        if term == 0.0 || term.abs() <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Hypergeometric(format!(
        "series for 2F1({a}, {b}; {c}; {x}) did not converge"
    )))
}

/// ₂F₁(a, b; c; x) with x ≤ 1.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if ![a, b, c, x].iter().all(|v| v.is_finite()) {
        return Err(Error::Hypergeometric("non-finite argument".into()));
    }
    if nonpositive_integer(c).is_some() {
        return Err(Error::Hypergeometric(format!("c = {c} is a pole")));
    }
    if x > 1.0 {
        return Err(Error::Hypergeometric(format!("x = {x} > 1 is off the real cut-free range")));
    }
    if x == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if nonpositive_integer(a).is_some() || nonpositive_integer(b).is_some() {
        return series(a, b, c, x);
    }
    if x < 0.0 {
        // Pfaff: (1−x)^{−a} ₂F₁(a, c−b; c; x/(x−1))
        let w = x / (x - 1.0);
        return Ok((1.0 - x).powf(-a) * hyp2f1(a, c - b, c, w)?);
    }
    if x <= 0.5 {
        return series(a, b, c, x);
    }
    if x == 1.0 {
        let m = c - a - b;
        if m <= 0.0 {
            return Err(Error::Hypergeometric(format!(
                "2F1 diverges at x = 1 when c − a − b = {m} ≤ 0"
            )));
        }
        return Ok(gamma(c)? * gamma(m)? * rgamma(c - a) * rgamma(c - b));
    }
    near_one(a, b, c, x)
}

/// ₂F₁(a, b; c; 1 − y) for 0 < y ≤ 1/2, taking y directly so that small y
/// keeps its relative precision.
pub fn hyp2f1_complement(a: f64, b: f64, c: f64, y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 0.5) {
        return hyp2f1(a, b, c, 1.0 - y);
    }
    if nonpositive_integer(c).is_some() {
        return Err(Error::Hypergeometric(format!("c = {c} is a pole")));
    }
    if nonpositive_integer(a).is_some() || nonpositive_integer(b).is_some() {
        return series(a, b, c, 1.0 - y);
    }
    connection(a, b, c, y)
}

/// 1 − x connection formulas for 1/2 < x < 1.
fn near_one(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    connection(a, b, c, 1.0 - x)
}

fn connection(a: f64, b: f64, c: f64, y: f64) -> Result<f64> {
    let m = c - a - b;
    let rounded = m.round();
    if (m - rounded).abs() > INTEGER_TOL {
        let first = gamma(c)? * gamma(m)? * rgamma(c - a) * rgamma(c - b);
        let second = gamma(c)? * gamma(-m)? * rgamma(a) * rgamma(b);
        let mut out = 0.0;
        if first != 0.0 {
            out += first * series(a, b, 1.0 - m, y)?;
        }
        if second != 0.0 {
            out += second * y.powf(m) * series(c - a, c - b, m + 1.0, y)?;
        }
        return Ok(out);
    }
    // integer c − a − b: logarithmic cases
    let mi = rounded as i64;
    if mi >= 0 {
        log_case_plus(a, b, mi as u32, y)
    } else {
        log_case_minus(a, b, (-mi) as u32, y)
    }
}

/// c = a + b + m, m ≥ 0.
fn log_case_plus(a: f64, b: f64, m: u32, y: f64) -> Result<f64> {
    let mf = m as f64;
    let c = a + b + mf;
    let ln_y = y.ln();
    let mut finite = 0.0;
    if m > 0 {
        let pref = gamma(mf)? * gamma(c)? * rgamma(a + mf) * rgamma(b + mf);
        let mut term = 1.0;
        for n in 0..m {
            finite += term;
            let nf = n as f64;
            term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * y;
        }
        finite *= pref;
    }
    let pref = gamma(c)? * rgamma(a) * rgamma(b);
    if pref == 0.0 {
        return Ok(finite);
    }
    // Σ (a+m)_n (b+m)_n / (n! (n+m)!) yⁿ [ln y − ψ(n+1) − ψ(n+m+1) + ψ(a+n+m) + ψ(b+n+m)]
    let mut coef = rgamma(mf + 1.0);
    let mut sum = 0.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let bracket = ln_y - digamma(nf + 1.0)? - digamma(nf + mf + 1.0)?
            + digamma(a + nf + mf)?
            + digamma(b + nf + mf)?;
        let term = coef * bracket;
        sum += term;
        if n > 2 && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            return Ok(finite - pref * sign * y.powi(m as i32) * sum);
        }
        coef *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * y;
    }
    Err(Error::Hypergeometric("logarithmic series did not converge".into()))
}

/// c = a + b − m, m ≥ 1.
fn log_case_minus(a: f64, b: f64, m: u32, y: f64) -> Result<f64> {
    let mf = m as f64;
    let c = a + b - mf;
    let ln_y = y.ln();
    let pref = gamma(mf)? * gamma(c)? * rgamma(a) * rgamma(b);
    let mut finite = 0.0;
    let mut term = 1.0;
    for n in 0..m {
        finite += term;
        let nf = n as f64;
        term *= (a - mf + nf) * (b - mf + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * y;
    }
    finite *= pref * y.powi(-(m as i32));
    let pref = gamma(c)? * rgamma(a - mf) * rgamma(b - mf);
    if pref == 0.0 {
        return Ok(finite);
    }
    let mut coef = rgamma(mf + 1.0);
    let mut sum = 0.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let bracket = ln_y - digamma(nf + 1.0)? - digamma(nf + mf + 1.0)?
            + digamma(a + nf)?
            + digamma(b + nf)?;
        let t = coef * bracket;
        sum += t;
        if n > 2 && t.abs() <= 1e-17 * sum.abs().max(1e-300) {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            return Ok(finite - sign * pref * sum);
        }
        coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * y;
    }
    Err(Error::Hypergeometric("logarithmic series did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn trivial_values() {
        assert_eq!(hyp2f1(0.3, 0.7, 1.9, 0.0).unwrap(), 1.0);
        assert!(close(hyp2f1(0.5, 1.5, 1.5, -1.0).unwrap(), 0.5f64.sqrt(), 1e-14));
        assert!(hyp2f1(1.0, 1.0, -2.0, 0.3).is_err());
        assert!(hyp2f1(1.0, 1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn elementary_reductions() {
        // ₂F₁(1,1;2;x) = −ln(1−x)/x, a logarithmic case near 1
        for x in [0.3, 0.6, 0.9, 0.999, -3.0, -40.0] {
            let want = -(1.0f64 - x).ln() / x;
            assert!(close(hyp2f1(1.0, 1.0, 2.0, x).unwrap(), want, 1e-13), "x = {x}");
        }
        // ₂F₁(1/2,1;3/2;−x²) = atan(x)/x
        for t in [0.2, 1.0, 3.0, 25.0] {
            let want = f64::atan(t) / t;
            assert!(close(hyp2f1(0.5, 1.0, 1.5, -t * t).unwrap(), want, 1e-13), "t = {t}");
        }
        // ₂F₁(a,b;b;x) = (1−x)^{−a}
        for x in [0.7, 0.95, -5.0] {
            assert!(close(hyp2f1(0.3, 1.7, 1.7, x).unwrap(), (1.0f64 - x).powf(-0.3), 1e-13));
        }
    }
}
