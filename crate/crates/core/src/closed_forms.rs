//! Exact reference formulas: Schramm's one-point probability, the
//! Simmons–Cardy two-point probability, H₀, H₁ and the one-point Green's
//! function, plus a finite-difference check of the null-vector equations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cft::{cross_ratio, kac_weight, BoundaryFrame, BoundaryPoint, KacLabel};
use crate::numerics::{gamma, hyp2f1, hyp2f1_complement};
use crate::{Error, HalfPlanePoint, Kappa, Result};

/// A probability in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ProbabilityValue(f64);

impl ProbabilityValue {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(ProbabilityValue(p))
        } else {
            Err(Error::InconsistentWeights(format!("probability {p} outside [0, 1]")))
        }
    }

    /// Clamps values within `tol` of [0, 1]; anything further out is an error.
    pub fn clamped(p: f64, tol: f64) -> Result<Self> {
        if p >= -tol && p <= 1.0 + tol {
            Ok(ProbabilityValue(p.clamp(0.0, 1.0)))
        } else {
            Err(Error::InconsistentWeights(format!(
                "probability {p} outside [0, 1] by more than {tol:.1e}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which evaluation produced a correlator and hence which branch convention
/// its phase follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchTag {
    /// Closed form, √(1−η) on the lower half-plane root.
    ClosedForm,
    /// Conjugation-symmetric contours z_k → z̄_k, phase iⁿ removed.
    SymmetricContours,
    /// Straight segments in the η-plane, principal branch at each midpoint.
    EtaPlaneMidpoint,
}

/// A correlator together with the boundary two-point function of its frame.
///
/// For frames with an anchor at infinity both `value` and `h0` are reported
/// with the divergent (x₂ − x₁) power stripped, so `h0 = 1` and the ratio is
/// the physical quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorValue {
    pub value: Complex64,
    pub h0: f64,
    pub frame: BoundaryFrame,
    pub branch_tag: BranchTag,
    /// Estimated absolute error of `value`.
    pub error_estimate: f64,
}

impl CorrelatorValue {
    /// H / H₀.
    pub fn ratio(&self) -> Complex64 {
        self.value / self.h0
    }
}

/// Probability that the trace passes to the left of z:
/// 1/2 + Γ(4/κ)/(√π Γ((8−κ)/(2κ))) · (x/y) · ₂F₁(1/2, 4/κ; 3/2; −x²/y²).
pub fn schramm_probability(z: HalfPlanePoint, k: Kappa) -> Result<ProbabilityValue> {
    let kv = k.value();
    let (x, y) = (z.x(), z.y());
    let pref = gamma(4.0 / kv)? / (PI.sqrt() * gamma((8.0 - kv) / (2.0 * kv))?);
    let t = x / y;
    let p = 0.5 + pref * t * hyp2f1(0.5, 4.0 / kv, 1.5, -t * t)?;
    ProbabilityValue::clamped(p, 1e-12)
}

/// G(σ) = 1 − σ ₂F₁(1, 4/3; 5/3; 1 − σ).
pub fn simmons_cardy_g(sigma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidInput(format!("σ = {sigma} outside [0, 1]")));
    }
    if sigma == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - sigma * hyp2f1_complement(1.0, 4.0 / 3.0, 5.0 / 3.0, sigma)?)
}

/// Probability that the SLE(8/3) trace passes to the left of both z and w.
pub fn simmons_cardy_two_point(z: HalfPlanePoint, w: HalfPlanePoint) -> Result<ProbabilityValue> {
    if z == w {
        return Err(Error::CoincidentPoints("z = w".into()));
    }
    let (zc, wc) = (z.z(), w.z());
    let sigma = (zc - wc).norm_sqr() / (zc - wc.conj()).norm_sqr();
    let pz = schramm_probability(z, Kappa::SAW)?.value();
    let pw = schramm_probability(w, Kappa::SAW)?.value();
    let fz = z.y() / (z.x() + zc.norm());
    let fw = w.y() / (w.x() + wc.norm());
    let p = pz * pw * (1.0 + fz * fw * simmons_cardy_g(sigma)?);
    ProbabilityValue::clamped(p, 1e-12)
}

/// |x₂ − x₁|^{−2h₁,₂}; 1 for frames with an anchor at infinity.
pub fn h0(frame: BoundaryFrame, k: Kappa) -> Result<CorrelatorValue> {
    let h12 = kac_weight(KacLabel::ONE_LEG, k);
    let v = match (frame.x1(), frame.x2()) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => (b - a).abs().powf(-2.0 * h12),
        _ => 1.0,
    };
    Ok(CorrelatorValue {
        value: Complex64::new(v, 0.0),
        h0: v,
        frame,
        branch_tag: BranchTag::ClosedForm,
        error_estimate: 0.0,
    })
}

/// G₁(η) = (2 − η)/(2√(1 − η)) with the square root taken in the lower
/// half-plane, which makes G₁ = cos arg f(z) for the canonical image f(z).
pub fn g1(eta: Complex64) -> Complex64 {
    let mut root = (1.0 - eta).sqrt();
    if root.im > 0.0 {
        root = -root;
    }
    (2.0 - eta) / (2.0 * root)
}

/// H₁(z, z̄; x₁, x₂) = (2 Im z)^{1−3κ/8} G₁(η) · H₀.
pub fn h1_closed(z: HalfPlanePoint, frame: BoundaryFrame, k: Kappa) -> Result<CorrelatorValue> {
    let eta = cross_ratio(z.z().conj(), z.z(), frame)?;
    let h21 = kac_weight(KacLabel::TWIST, k);
    let base = h0(frame, k)?;
    let ratio = (2.0 * z.y()).powf(-2.0 * h21) * g1(eta);
    Ok(CorrelatorValue {
        value: ratio * base.h0,
        branch_tag: BranchTag::ClosedForm,
        ..base
    })
}

/// (Im z)^{−2/3} sin²(arg z), the one-point SLE(8/3) Green's function in the
/// (0, ∞) frame normalised to 1 at z = i.
pub fn green1_closed(z: HalfPlanePoint) -> f64 {
    let s = z.y() / z.z().norm();
    z.y().powf(-2.0 / 3.0) * s * s
}

/// The four arguments of H₁ treated as independent complex variables.
#[derive(Debug, Clone, Copy)]
struct H1Args {
    z: Complex64,
    zs: Complex64,
    x1: Complex64,
    x2: Complex64,
}

/// H₁ continued analytically in all four arguments around a base point; each
/// multivalued factor is continued from its value there.
struct AnalyticH1 {
    base: H1Args,
    h21: f64,
    h12: f64,
    base_root: Complex64,
}

impl AnalyticH1 {
    fn eta(a: &H1Args) -> Complex64 {
        (a.z - a.zs) * (a.x2 - a.x1) / ((a.z - a.x1) * (a.x2 - a.zs))
    }

    fn eval(&self, a: &H1Args) -> Complex64 {
        let b = &self.base;
        let d = (a.z - a.zs) / (b.z - b.zs);
        let l = (a.x2 - a.x1) / (b.x2 - b.x1);
        let eta = Self::eta(a);
        let root = self.base_root * ((1.0 - eta) / (1.0 - Self::eta(b))).sqrt();
        let pz = (b.z - b.zs).powf(-2.0 * self.h21) * d.powf(-2.0 * self.h21);
        let px = (b.x2 - b.x1).powf(-2.0 * self.h12) * l.powf(-2.0 * self.h12);
        pz * px * (2.0 - eta) / (2.0 * root)
    }
}

/// Max over both null-vector equations of |L H₁| / |H₁|, with derivatives
/// from central differences of the given step. Requires a finite frame.
pub fn pde_residual_h1(
    z: HalfPlanePoint,
    frame: BoundaryFrame,
    k: Kappa,
    step: f64,
) -> Result<f64> {
    let (x1, x2) = match (frame.x1(), frame.x2()) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => (a, b),
        _ => {
            return Err(Error::InvalidInput(
                "the PDE residual needs both anchors finite".into(),
            ))
        }
    };
    if !(step > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    let base = H1Args {
        z: z.z(),
        zs: z.z().conj(),
        x1: Complex64::new(x1, 0.0),
        x2: Complex64::new(x2, 0.0),
    };
    let mut root = (1.0 - AnalyticH1::eta(&base)).sqrt();
    if root.im > 0.0 {
        root = -root;
    }
    let h = AnalyticH1 {
        base,
        h21: kac_weight(KacLabel::TWIST, k),
        h12: kac_weight(KacLabel::ONE_LEG, k),
        base_root: root,
    };
    let f0 = h.eval(&base);
    let shift = |which: usize, by: f64| {
        let mut a = base;
        match which {
            0 => a.z += by,
            1 => a.zs += by,
            2 => a.x1 += by,
            _ => a.x2 += by,
        }
        h.eval(&a)
    };
    let d1 = |w: usize| (shift(w, step) - shift(w, -step)) / (2.0 * step);
    let d2 = |w: usize| (shift(w, step) - 2.0 * f0 + shift(w, -step)) / (step * step);
    let (h21, h12) = (h.h21, h.h12);
    let (zz, zs, a1, a2) = (base.z, base.zs, base.x1, base.x2);

    let first = 3.0 / (2.0 * (1.0 + 2.0 * h21)) * d2(0)
        - h21 / (zs - zz).powi(2) * f0
        + d1(1) / (zs - zz)
        - h12 / (a1 - zz).powi(2) * f0
        + d1(2) / (a1 - zz)
        - h12 / (a2 - zz).powi(2) * f0
        + d1(3) / (a2 - zz);
    let second = 3.0 / (2.0 * (1.0 + 2.0 * h12)) * d2(2)
        - h21 / (zs - a1).powi(2) * f0
        + d1(1) / (zs - a1)
        - h21 / (zz - a1).powi(2) * f0
        + d1(0) / (zz - a1)
        - h12 / (a2 - a1).powi(2) * f0
        + d1(3) / (a2 - a1);
    Ok(first.norm().max(second.norm()) / f0.norm())
}
