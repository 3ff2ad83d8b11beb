//! Gamma, log-Gamma, reciprocal Gamma and digamma via the Lanczos
//! approximation (g = 7, nine terms) with reflection.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Lanczos series for ln Γ(z) with Re z ≥ 1/2.
fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(z) for complex z away from the poles at 0, −1, −2, …
pub fn gamma_fn(z: impl Into<Complex64>) -> Result<Complex64> {
    let z = z.into();
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(Error::GammaPole(z));
    }
    if z.im == 0.0 {
        return gamma(z.re).map(Complex64::from);
    }
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        Ok(PI / (s * ln_gamma_lanczos(1.0 - z).exp()))
    } else {
        Ok(ln_gamma_lanczos(z).exp())
    }
}

/// Real Γ(x).
pub fn gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(Complex64::new(x, 0.0)));
    }
    if x < 0.5 {
        return Ok(PI / ((PI * x).sin() * gamma(1.0 - x)?));
    }
    if x == x.round() && x <= 30.0 {
        // exact factorials keep small integer arguments free of rounding
        return Ok((1..x as u32).map(f64::from).product());
    }
    Ok(ln_gamma_lanczos(Complex64::new(x, 0.0)).re.exp())
}

/// ln |Γ(x)|.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(Complex64::new(x, 0.0)));
    }
    if x < 0.5 {
        return Ok((PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x)?);
    }
    Ok(ln_gamma_lanczos(Complex64::new(x, 0.0)).re)
}

/// 1/Γ(x), zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else if x > 170.0 {
        (-ln_gamma(x).unwrap_or(f64::INFINITY)).exp()
    } else {
        1.0 / gamma(x).unwrap_or(f64::INFINITY)
    }
}

/// B(a, b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta(a: f64, b: f64) -> Result<f64> {
    let sign = gamma(a)?.signum() * gamma(b)?.signum() * rgamma(a + b).signum();
    Ok(sign * (ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// ψ(x) = Γ′(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(Complex64::new(x, 0.0)));
    }
    if x < 0.0 {
        return Ok(digamma(1.0 - x)? - PI / (PI * x).tan());
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 20.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli tail B_{2k}/(2k x^{2k})
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    Ok(acc + x.ln() - 0.5 / x - tail)
}
