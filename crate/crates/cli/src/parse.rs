//! Command-line literals: complex numbers as `a+bi`, boundary points with
//! `inf`, and κ as a decimal or a fraction.

use num_complex::Complex64;
use slewind::{BoundaryFrame, BoundaryPoint, HalfPlanePoint, Kappa};

use crate::error::CliError;

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Input(format!("cannot read {what} from '{s}'")))
}

/// `3`, `-2.5i`, `1+1i`, `0.5-i`, `1e-3+2E-1i`.
pub fn complex(text: &str) -> Result<Complex64, CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(number(&s, "a real number")?, 0.0));
    };
    // the sign that starts the imaginary part: last +/− not at the front
    // and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => number(t, "an imaginary part")?,
    };
    let re = if re.is_empty() { 0.0 } else { number(re, "a real part")? };
    Ok(Complex64::new(re, im))
}

pub fn point(text: &str) -> Result<HalfPlanePoint, CliError> {
    Ok(HalfPlanePoint::new(complex(text)?)?)
}

fn boundary(text: &str) -> Result<BoundaryPoint, CliError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(BoundaryPoint::Infinity),
        t => Ok(BoundaryPoint::Finite(number(t, "a boundary point")?)),
    }
}

/// `x1,x2`, either of which may be `inf`.
pub fn frame(text: &str) -> Result<BoundaryFrame, CliError> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| CliError::Input(format!("frame '{text}' must be x1,x2")))?;
    Ok(BoundaryFrame::new(boundary(a)?, boundary(b)?)?)
}

/// `2.9` or `8/3`.
pub fn kappa(text: &str) -> Result<Kappa, CliError> {
    let v = match text.split_once('/') {
        Some((n, d)) => number(n, "κ")? / number(d, "κ")?,
        None => number(text, "κ")?,
    };
    Ok(Kappa::new(v)?)
}
