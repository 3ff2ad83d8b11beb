//! Screening integrals written in the cross-ratio plane, where z₁ ↦ 0,
//! x₁ ↦ 1 and x₂ ↦ ∞:
//!
//!   J_n = ∫_0^{η₁} du₁ ∫_{η₂}^{η₃} du₂ ⋯ Π_i u_i^{−κ/4}(1 − u_i) Π_k (u_i − η_k)^{−κ/4} Π_{i<j}(u_i − u_j)^{κ/2}
//!
//! with straight segments and every power on the principal branch at the
//! midpoint of its segment (pairs: at the difference of midpoints).

use std::f64::consts::PI;

use num_complex::Complex64;

use super::n1_constant;
use super::tensor::{sampled_sum, tensor_sum, ContourNodes, CouplingBranch, PairBranches};
use crate::cft::{cross_ratio, kac_weight, KacLabel};
use crate::closed_forms::{h0, h1_closed, BranchTag, CorrelatorValue};
use crate::numerics::{clear_path, path_nodes, PowerFactor, Segment};
use crate::{BoundaryFrame, Error, HalfPlanePoint, Kappa, Result};

const SAMPLES: usize = 400_000;
const TENSOR_MAX: usize = 4;

/// The n-fold integral J_n for the 2n − 1 cross-ratios η₁…η_{2n−1}.
/// Segments closer than the clearance to a foreign singularity are bent
/// into a two-leg detour; above four variables the sum is sampled.
pub fn jn_integral(etas: &[Complex64], k: Kappa, order: usize) -> Result<Complex64> {
    if etas.len() % 2 == 0 {
        return Err(Error::InvalidInput(format!("J_n needs 2n − 1 cross-ratios, got {}", etas.len())));
    }
    let e = -k.value() / 4.0;
    let mut singular: Vec<PowerFactor> = vec![PowerFactor::new(Complex64::new(0.0, 0.0), e)];
    singular.extend(etas.iter().map(|&p| PowerFactor::new(p, e)));
    for (i, f) in singular.iter().enumerate() {
        if singular[..i].iter().any(|g| g.base_point == f.base_point) {
            return Err(Error::CoincidentPoints(format!("cross-ratio {} repeated", f.base_point)));
        }
    }
    let n = etas.len().div_ceil(2);
    let mut contours = Vec::with_capacity(n);
    let mut mids = Vec::with_capacity(n);
    for i in 0..n {
        let a = if i == 0 { Complex64::new(0.0, 0.0) } else { etas[2 * i - 1] };
        let b = etas[2 * i];
        let seg = Segment::new(a, b)?;
        mids.push(seg.branch_anchor);
        let path = clear_path(&singular, &seg)?;
        let mut cn = ContourNodes::default();
        for (u, w) in path_nodes(&singular, &path, order)? {
            cn.push(u, w * (1.0 - u));
        }
        contours.push(cn);
    }
    let branches = PairBranches::new(n, |i, j| CouplingBranch::anchored(mids[i] - mids[j]));
    let gamma = k.value() / 2.0;
    if n <= TENSOR_MAX {
        Ok(tensor_sum(&contours, branches, gamma))
    } else {
        Ok(sampled_sum(&contours, &branches, gamma, SAMPLES, 0x5eed).mean)
    }
}

/// H₁/H₀ = N₁ η^{2h₂,₁+κ/8} J₁(η) / ((z − z̄)^{2h₂,₁} √(1 − η)) before the
/// global phase is fixed.
fn h1_uncalibrated(z: HalfPlanePoint, frame: BoundaryFrame, k: Kappa, order: usize) -> Result<Complex64> {
    let kv = k.value();
    let eta = cross_ratio(z.z().conj(), z.z(), frame)?;
    let h21 = kac_weight(KacLabel::TWIST, k);
    let j1 = jn_integral(&[eta], k, order)?;
    // The midpoint branch of (u − η) sits at Arg(−η), which jumps by 2π
    // where η crosses the positive axis (z above x₁ in the canonical
    // picture). Continuing from arg η − π removes the jump.
    let continuous = eta.arg() - PI;
    let principal = (-eta).arg();
    let fix = Complex64::from_polar(1.0, -kv / 4.0 * (continuous - principal));
    let mut root = (1.0 - eta).sqrt();
    if root.im > 0.0 {
        root = -root;
    }
    let two_iy = Complex64::new(0.0, 2.0 * z.y());
    Ok(n1_constant(k)? * eta.powf(2.0 * h21 + kv / 8.0) * j1 * fix / (two_iy.powf(2.0 * h21) * root))
}

/// Unit phase that makes the η-plane H₁ agree with the real closed form at
/// z = 1 + i in the canonical frame.
fn h1_phase(k: Kappa, order: usize) -> Result<Complex64> {
    let reference = HalfPlanePoint::from_xy(1.0, 1.0)?;
    let raw = h1_uncalibrated(reference, BoundaryFrame::CANONICAL, k, order)?;
    let exact = h1_closed(reference, BoundaryFrame::CANONICAL, k)?.value;
    let ratio = exact / raw;
    Ok(ratio / ratio.norm())
}

/// H₁(z, z̄; x₁, x₂) from one screening integral along the segment 0 → η.
pub fn h1_cg(z: HalfPlanePoint, frame: BoundaryFrame, k: Kappa, order: usize) -> Result<CorrelatorValue> {
    let phase = h1_phase(k, order)?;
    let v = h1_uncalibrated(z, frame, k, order)? * phase;
    let coarse = h1_uncalibrated(z, frame, k, (order * 2 / 3).max(2))? * h1_phase(k, (order * 2 / 3).max(2))?;
    let base = h0(frame, k)?;
    Ok(CorrelatorValue {
        value: v * base.h0,
        h0: base.h0,
        frame,
        branch_tag: BranchTag::EtaPlaneMidpoint,
        error_estimate: (v - coarse).norm() * base.h0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coulomb_gas::{canonical_ratio_on, HnOptions, Layout};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn j1_reference_values() {
        // η^{1+a}(−η)^a B(a + 1, a + 1)(1 − η/2) with a = −κ/4, principal logs (mpmath)
        let cases = [
            (c(1.0, 1.0), 8.0 / 3.0, c(1.669_369_011_783_458_1, 2.891_431_944_989_997_2)),
            (c(0.3, -0.8), 3.0, c(1.941_014_924_045_255_8, -7.283_051_786_083_030_2)),
            (c(1.5, 0.6), 10.0 / 3.0, c(0.270_429_386_563_861_75, 3.269_241_117_685_522_3)),
        ];
        for (eta, kv, want) in cases {
            let got = jn_integral(&[eta], Kappa::new(kv).unwrap(), 64).unwrap();
            assert!((got - want).norm() < 1e-9 * want.norm(), "η={eta}: {got} vs {want}");
        }
    }

    #[test]
    fn j1_vanishes_on_the_symmetry_axis() {
        // z = i: η = 2 and the integrand is odd about u = 1
        let v = jn_integral(&[c(2.0, 0.0)], Kappa::SAW, 64).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn j1_converges_in_order() {
        let eta = c(0.4, -1.3);
        let a = jn_integral(&[eta], Kappa::SAW, 32).unwrap();
        let b = jn_integral(&[eta], Kappa::SAW, 64).unwrap();
        assert!((a - b).norm() < 1e-9 * b.norm());
    }

    #[test]
    fn h1_against_closed_form() {
        let k = Kappa::SAW;
        let z = HalfPlanePoint::from_xy(1.0, 1.0).unwrap();
        let v = h1_cg(z, BoundaryFrame::CANONICAL, k, 64).unwrap();
        assert!((v.value.re - 0.5f64.sqrt()).abs() < 1e-8);
        let on_axis = h1_cg(HalfPlanePoint::from_xy(0.0, 1.7).unwrap(), BoundaryFrame::CANONICAL, k, 64).unwrap();
        assert!(on_axis.value.norm() < 1e-8);
        let k3 = Kappa::new(3.0).unwrap();
        let z = HalfPlanePoint::from_xy(1.0, 2.0).unwrap();
        let frame = BoundaryFrame::finite(0.0, 3.0).unwrap();
        let v = h1_cg(z, frame, k3, 64).unwrap();
        let want = h1_closed(z, frame, k3).unwrap();
        assert!((v.value - want.value).norm() < 1e-8 * want.value.norm());
        // left of x₁, where η has negative argument
        let z = HalfPlanePoint::from_xy(-0.7, 0.4).unwrap();
        let v = h1_cg(z, BoundaryFrame::CANONICAL, k3, 64).unwrap();
        let want = h1_closed(z, BoundaryFrame::CANONICAL, k3).unwrap();
        assert!((v.value - want.value).norm() < 1e-8 * want.value.norm(), "{} vs {}", v.value, want.value);
    }

    #[test]
    fn j2_matches_pair_symmetric_form_in_modulus() {
        // at κ = 8/3 the η-plane map u ↦ 1 − u/z₁ carries the vertical
        // contours onto the straight segments, so only the phase differs
        let k = Kappa::SAW;
        let kv = k.value();
        let (z1, z2) = (c(0.5, 1.0), c(-0.7, 0.8));
        let eta = |s: Complex64| 1.0 - s / z1;
        let etas = [eta(z1.conj()), eta(z2), eta(z2.conj())];
        let j2 = jn_integral(&etas, k, 48).unwrap();
        let n1 = n1_constant(k).unwrap().norm();
        let mut pref = n1 * n1;
        for (i, e) in etas.iter().enumerate() {
            pref *= e.norm().powf(kv / 8.0) / (1.0 - e).norm().sqrt();
            for f in &etas[..i] {
                pref *= (e - f).norm().powf(kv / 8.0);
            }
        }
        let layout = Layout::vertical(&[z1, z2]).unwrap();
        let h2 = canonical_ratio_on(&layout, k, &HnOptions::with_order(24)).unwrap().value;
        assert!(((pref * j2).norm() - h2.norm()).abs() < 1e-9 * h2.norm(), "{} vs {}", pref * j2.norm(), h2);
    }
}
