//! Coulomb-gas blocks for the SLE(8/3) Green's functions.
//!
//! One point: ⟨V₃,₁(z)V₋₃,₋₁(z̄)V₁,₂(x₁)V₋₁,₋₂(x₂)Q⁻⟩. In the η-plane the
//! screening integrand is u^{8/κ−4}(1 − u)^{−4/κ}(u − η)², which at κ = 8/3
//! has a simple pole at u = 0; the block is its residue, η², and
//!
//!   G(z) = −η² / (4 (Im z)^{2/3} (1 − η))   in the (0, ∞) frame.
//!
//! The overall sign is fixed so that G(i) = +1.
//!
//! Two points: the printed four-fold integral with two screenings on
//! (1, ∞) is checked for convergence at infinity before any quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cft::cross_ratio;
use crate::{BoundaryFrame, Error, HalfPlanePoint, Result};

/// −η²/(4 (Im f(z))^{2/3} (1 − η)) · |f′(z)|^{2/3}, with f the map to (0, ∞).
pub fn green1_reduction(z: HalfPlanePoint, frame: BoundaryFrame) -> Result<Complex64> {
    let eta = cross_ratio(z.z().conj(), z.z(), frame)?;
    let map = frame.to_canonical();
    let w = map.apply(z.z());
    let jac = map.derivative_abs(z.z()).powf(2.0 / 3.0);
    Ok(-eta * eta / (4.0 * w.im.powf(2.0 / 3.0) * (1.0 - eta)) * jac)
}

/// (1/2πi)∮ u^{−1}(1 − u)^{−3/2}(u − η)² du on a circle around u = 0 that
/// excludes u = 1, by the trapezoidal rule (spectrally accurate).
fn residue_block(eta: Complex64, order: usize) -> Complex64 {
    let radius = 0.25;
    let n = order.max(4);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let u = Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64);
        // du/(2πi u) = dθ/2π, so the u^{−1} cancels against du
        acc += (1.0 - u).powf(-1.5) * (u - eta) * (u - eta);
    }
    acc / n as f64
}

/// One-point Green's function from the residue block, normalised to the
/// (0, ∞) convention G(i) = 1.
pub fn green1_block(z: HalfPlanePoint, frame: BoundaryFrame, order: usize) -> Result<Complex64> {
    let eta = cross_ratio(z.z().conj(), z.z(), frame)?;
    let map = frame.to_canonical();
    let w = map.apply(z.z());
    let jac = map.derivative_abs(z.z()).powf(2.0 / 3.0);
    let block = residue_block(eta, order);
    Ok(-block / (4.0 * w.im.powf(2.0 / 3.0) * (1.0 - eta)) * jac)
}

/// Exponent of u in the printed two-point integrand as one variable on a
/// leg to infinity grows: (u − 1)u^{−2/3}Π_{j≤3}(u − η_j)^{−2/3} and three
/// couplings (u − u_i)^{4/3}.
pub(crate) fn printed_growth_at_infinity() -> f64 {
    1.0 - 2.0 / 3.0 - 3.0 * 2.0 / 3.0 + 3.0 * 4.0 / 3.0
}

/// Two-point Green's block from the printed four-fold integral with u₁, u₂
/// on (1, ∞) mapped to (0, 1] by t = 1/u. The t-integrand behaves like
/// t^{−2−g} at t = 0 with g the growth exponent, and g = 7/3 for the
/// printed exponents, so the integral diverges and this always reports a
/// quadrature error. The two-point Green's function is available through
/// the passage-probability route in [`crate::green`].
pub fn green2_block(
    z: HalfPlanePoint,
    w: HalfPlanePoint,
    frame: BoundaryFrame,
    _order: usize,
) -> Result<Complex64> {
    if z == w {
        return Err(Error::CoincidentPoints("z = w".into()));
    }
    cross_ratio(z.z().conj(), z.z(), frame)?;
    let g = printed_growth_at_infinity();
    Err(Error::Quadrature(format!(
        "the two-point block integrand grows like u^{g:.4} on the legs to infinity; \
         after t = 1/u the endpoint exponent {:.4} is not integrable",
        -2.0 - g
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::green1_closed;

    fn hp(x: f64, y: f64) -> HalfPlanePoint {
        HalfPlanePoint::from_xy(x, y).unwrap()
    }

    #[test]
    fn reference_values() {
        let f = BoundaryFrame::CANONICAL;
        assert!((green1_block(hp(0.0, 1.0), f, 32).unwrap() - 1.0).norm() < 1e-12);
        assert!((green1_block(hp(1.0, 1.0), f, 32).unwrap() - 0.5).norm() < 1e-12);
        let g = green1_block(hp(0.0, 2.0), f, 32).unwrap();
        assert!((g - 2f64.powf(-2.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn residue_matches_reduction() {
        let frames = [BoundaryFrame::CANONICAL, BoundaryFrame::finite(-1.0, 2.5).unwrap()];
        for (i, x) in [-1.7, -0.3, 0.0, 0.4, 2.2].iter().enumerate() {
            for y in [0.2, 1.0, 3.0] {
                let z = hp(*x, y);
                let f = frames[i % 2];
                let a = green1_block(z, f, 48).unwrap();
                let b = green1_reduction(z, f).unwrap();
                assert!((a - b).norm() < 1e-8 * b.norm().max(1e-300), "{z:?}");
                if f.is_canonical() {
                    assert!((a.re - green1_closed(z)).abs() < 1e-12 * green1_closed(z));
                }
            }
        }
    }

    #[test]
    fn printed_two_point_block_diverges() {
        assert!(printed_growth_at_infinity() > 2.0);
        let e = green2_block(hp(0.0, 1.0), hp(1.0, 1.0), BoundaryFrame::CANONICAL, 16).unwrap_err();
        assert!(matches!(e, Error::Quadrature(_)));
    }
}
