//! H_n(z₁, z̄₁, …, z_n, z̄_n; x₁, x₂) for the identity-channel contour choice.
//!
//! In the canonical frame (x₁, x₂) = (0, ∞) the screened correlator is
//!
//!   H_n/H₀ = |N₁|ⁿ Π_j (2y_j)^{κ/8} |z_j|^{−1} Π_{j<k} (|z_j − z_k||z_j − z̄_k|)^{κ/4} · iⁿ · I_n,
//!
//!   I_n = ∫ Π_k u_k Π_{k,j} ((u_k − z_j)(u_k − z̄_j))^{−κ/4} Π_{k<l} (u_k − u_l)^{κ/2} du,
//!
//! where contour k joins z_k to z̄_k. This is the η-plane integral J_n after
//! the Möbius change of variables u ↦ η(u); the pair-symmetric form keeps the
//! integrand real-symmetric under conjugation, so iⁿ I_n is real. Other
//! frames pick up |f′(z_j)|^{2h₂,₁} per point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::contours::Layout;
use super::n1_constant;
use super::tensor::{sampled_sum, tensor_sum, CouplingBranch, PairBranches};
use crate::cft::{kac_weight, KacLabel};
use crate::closed_forms::{h0, BranchTag, CorrelatorValue};
use crate::{BoundaryFrame, Error, HalfPlanePoint, Kappa, Result};

/// Evaluation controls for [`hn_cg_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HnOptions {
    /// Gauss nodes per contour piece.
    pub order: usize,
    /// Largest n evaluated by full tensor product; above it the sum is
    /// importance-sampled.
    pub tensor_max: usize,
    pub samples: usize,
    pub seed: u64,
    /// Re-evaluate at a coarser order to estimate the quadrature error.
    pub error_probe: bool,
}

impl HnOptions {
    pub fn with_order(order: usize) -> Self {
        HnOptions { order, ..Self::default() }
    }
}

impl Default for HnOptions {
    fn default() -> Self {
        HnOptions { order: 16, tensor_max: 4, samples: 400_000, seed: 0x5eed, error_probe: true }
    }
}

/// iⁿ I_n together with its prefactor, in the canonical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalRatio {
    pub value: Complex64,
    pub error: f64,
}

fn sum_contours(layout: &Layout, kappa: f64, opts: &HnOptions, order: usize) -> Result<(Complex64, f64)> {
    let n = layout.points().len();
    let contours = (0..n)
        .map(|k| layout.contour_nodes(k, kappa, order))
        .collect::<Result<Vec<_>>>()?;
    let branches = PairBranches::new(n, |k, l| CouplingBranch::signed(layout.side(k, l)));
    if n <= opts.tensor_max {
        Ok((tensor_sum(&contours, branches, kappa / 2.0), 0.0))
    } else {
        let s = sampled_sum(&contours, &branches, kappa / 2.0, opts.samples, opts.seed);
        Ok((s.mean, s.std_err))
    }
}

fn prefactor(points: &[Complex64], k: Kappa) -> Result<f64> {
    let kv = k.value();
    let n1 = n1_constant(k)?.norm();
    let mut log = points.len() as f64 * n1.ln();
    for (j, p) in points.iter().enumerate() {
        log += kv / 8.0 * (2.0 * p.im).ln() - p.norm().ln();
        for q in &points[j + 1..] {
            log += kv / 4.0 * ((p - q).norm().ln() + (p - q.conj()).norm().ln());
        }
    }
    Ok(log.exp())
}

fn i_pow(n: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][n % 4]
}

/// H_n/H₀ for canonical-frame points on a given contour layout.
pub fn canonical_ratio_on(layout: &Layout, k: Kappa, opts: &HnOptions) -> Result<CanonicalRatio> {
    let points = layout.points();
    let n = points.len();
    if n == 0 {
        return Ok(CanonicalRatio { value: Complex64::new(1.0, 0.0), error: 0.0 });
    }
    let scale = prefactor(points, k)? * i_pow(n);
    let (sum, stat) = sum_contours(layout, k.value(), opts, opts.order)?;
    let mut error = stat * scale.norm();
    if opts.error_probe {
        let coarse = (opts.order * 2 / 3).max(2);
        let (rough, _) = sum_contours(layout, k.value(), opts, coarse)?;
        error += ((sum - rough) * scale).norm();
    }
    Ok(CanonicalRatio { value: sum * scale, error })
}

/// H_n/H₀ for points already in the canonical frame.
pub fn canonical_ratio(points: &[Complex64], k: Kappa, opts: &HnOptions) -> Result<CanonicalRatio> {
    for (i, p) in points.iter().enumerate() {
        if points[..i].contains(p) {
            return Err(Error::CoincidentPoints(format!("point {p} repeated")));
        }
    }
    let layout = Layout::choose(points)?;
    canonical_ratio_on(&layout, k, opts)
}

/// H_n with one screening contour per pair (z_j, z̄_j), all pairs fusing to
/// the boundary in the identity channel.
pub fn hn_cg(points: &[HalfPlanePoint], frame: BoundaryFrame, k: Kappa, order: usize) -> Result<CorrelatorValue> {
    hn_cg_with(points, frame, k, &HnOptions::with_order(order))
}

pub fn hn_cg_with(
    points: &[HalfPlanePoint],
    frame: BoundaryFrame,
    k: Kappa,
    opts: &HnOptions,
) -> Result<CorrelatorValue> {
    let map = frame.to_canonical();
    let h21 = kac_weight(KacLabel::TWIST, k);
    let mut mapped = Vec::with_capacity(points.len());
    let mut jacobian = 1.0;
    for p in points {
        mapped.push(map.apply(p.z()));
        jacobian *= map.derivative_abs(p.z()).powf(2.0 * h21);
    }
    let r = canonical_ratio(&mapped, k, opts)?;
    let base = h0(frame, k)?;
    Ok(CorrelatorValue {
        value: r.value * jacobian * base.h0,
        h0: base.h0,
        frame,
        branch_tag: BranchTag::SymmetricContours,
        error_estimate: r.error * jacobian * base.h0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{h1_closed, schramm_probability, simmons_cardy_two_point};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hp(re: f64, im: f64) -> HalfPlanePoint {
        HalfPlanePoint::from_xy(re, im).unwrap()
    }

    #[test]
    fn one_point_matches_closed_form() {
        for kv in [8.0 / 3.0, 3.0, 10.0 / 3.0] {
            let k = Kappa::new(kv).unwrap();
            for (z, frame) in [
                (hp(1.0, 1.0), BoundaryFrame::CANONICAL),
                (hp(-0.4, 0.3), BoundaryFrame::CANONICAL),
                (hp(1.0, 2.0), BoundaryFrame::finite(0.0, 3.0).unwrap()),
                (hp(-2.0, 1.0), BoundaryFrame::finite(4.0, -1.0).unwrap()),
            ] {
                let got = hn_cg(&[z], frame, k, 24).unwrap();
                let want = h1_closed(z, frame, k).unwrap();
                assert!((got.value - want.value).norm() < 1e-10 * want.h0, "κ={kv} {z:?}: {} vs {}", got.value, want.value);
            }
        }
    }

    #[test]
    fn two_points_reproduce_simmons_cardy() {
        for (z, w) in [(hp(0.5, 1.0), hp(-0.7, 0.8)), (hp(0.0, 1.0), hp(0.0, 2.0)), (hp(1.0, 1.0), hp(2.0, 0.5))] {
            let h2 = hn_cg(&[z, w], BoundaryFrame::CANONICAL, Kappa::SAW, 16).unwrap().ratio().re;
            let pz = schramm_probability(z, Kappa::SAW).unwrap().value();
            let pw = schramm_probability(w, Kappa::SAW).unwrap().value();
            let sc = simmons_cardy_two_point(z, w).unwrap().value();
            let want = 4.0 * sc - 2.0 * pz - 2.0 * pw + 1.0;
            assert!((h2 - want).abs() < 1e-9, "{z:?},{w:?}: {h2} vs {want}");
        }
    }

    #[test]
    fn relabeling_and_layout_do_not_matter() {
        let pts = [c(0.4, 1.0), c(-0.6, 0.7), c(1.2, 1.9)];
        let opts = HnOptions::with_order(12);
        let a = canonical_ratio(&pts, Kappa::SAW, &opts).unwrap().value;
        let b = canonical_ratio(&[pts[2], pts[0], pts[1]], Kappa::SAW, &opts).unwrap().value;
        let v = canonical_ratio_on(&Layout::vertical(&pts).unwrap(), Kappa::SAW, &opts).unwrap().value;
        assert!((a - b).norm() < 1e-10 * a.norm());
        assert!((a - v).norm() < 1e-10 * a.norm(), "{a} vs {v}");
        assert!(a.im.abs() < 1e-12 * a.norm());
    }

    #[test]
    fn scale_invariant_at_saw() {
        let pts = [hp(0.4, 1.0), hp(-0.6, 0.7)];
        let scaled: Vec<HalfPlanePoint> = pts.iter().map(|p| hp(3.0 * p.x(), 3.0 * p.y())).collect();
        let a = hn_cg(&pts, BoundaryFrame::CANONICAL, Kappa::SAW, 12).unwrap().value;
        let b = hn_cg(&scaled, BoundaryFrame::CANONICAL, Kappa::SAW, 12).unwrap().value;
        assert!((a - b).norm() < 1e-11);
    }
}
