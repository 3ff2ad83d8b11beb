//! Quadrature of Π(u − p_j)^{e_j} · g(u) along straight segments in ℂ.
//!
//! Powers are evaluated on one fixed branch: the principal logarithm at the
//! segment's anchor point (its midpoint unless stated otherwise), continued
//! along the path. For a straight segment that stays clear of p this is
//! ln(anchor − p) + Log((u − p)/(anchor − p)), because the path subtends an
//! angle smaller than π as seen from p.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jacobi::{jacobi_rule, JacobiRule};
use crate::{Error, Result};

/// Singularity-to-contour clearance as a fraction of the segment length.
pub const D_MIN_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFactor {
    pub base_point: Complex64,
    pub exponent: f64,
}

impl PowerFactor {
    pub fn new(base_point: Complex64, exponent: f64) -> Self {
        PowerFactor { base_point, exponent }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Complex64,
    pub b: Complex64,
    /// Point at which every factor takes its principal value.
    pub branch_anchor: Complex64,
}

impl Segment {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidInput("segment endpoints coincide".into()));
        }
        Ok(Segment { a, b, branch_anchor: 0.5 * (a + b) })
    }

    pub fn with_anchor(self, anchor: Complex64) -> Self {
        Segment { branch_anchor: anchor, ..self }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn point(&self, t: f64) -> Complex64 {
        0.5 * (self.a + self.b) + 0.5 * (self.b - self.a) * t
    }

    /// Distance from p to the closed segment.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        let d = self.b - self.a;
        let s = ((p - self.a) * d.conj()).re / d.norm_sqr();
        let s = s.clamp(0.0, 1.0);
        (p - (self.a + d * s)).norm()
    }
}

/// ln(u − p) on the branch anchored at `anchor`.
pub fn anchored_log(u: Complex64, p: Complex64, anchor: Complex64) -> Complex64 {
    let reference = anchor - p;
    reference.ln() + ((u - p) / reference).ln()
}

/// Phases arg(u_i − p) along the rule's nodes on the anchored branch, for
/// checking continuity.
pub fn phase_track(p: Complex64, seg: &Segment, rule: &JacobiRule) -> Vec<f64> {
    rule.nodes
        .iter()
        .map(|&t| anchored_log(seg.point(t), p, seg.branch_anchor).im)
        .collect()
}

/// Quadrature nodes u_i and complex weights w_i on `seg` such that
/// Σ w_i g(u_i) ≈ ∫_a^b Π(u − p_j)^{e_j} g(u) du. Factors sitting at an
/// endpoint must carry the matching rule exponent (α at b, β at a).
pub fn segment_nodes(
    factors: &[PowerFactor],
    seg: &Segment,
    rule: &JacobiRule,
) -> Result<Vec<(Complex64, Complex64)>> {
    let len = seg.length();
    let half = 0.5 * (seg.b - seg.a);
    let mut at_a = 0.0;
    let mut at_b = 0.0;
    let mut interior = Vec::with_capacity(factors.len());
    for f in factors {
        if f.base_point == seg.a {
            at_a += f.exponent;
        } else if f.base_point == seg.b {
            at_b += f.exponent;
        } else {
            let d = seg.distance_to(f.base_point);
            if d <= D_MIN_FRACTION * len {
                return Err(Error::SingularityOnContour { point: f.base_point, distance: d });
            }
            interior.push(*f);
        }
    }
    let tol = 1e-12;
    if (at_a - rule.beta_exp).abs() > tol || (at_b - rule.alpha_exp).abs() > tol {
        return Err(Error::InvalidRule(format!(
            "endpoint exponents ({at_b}, {at_a}) do not match rule ({}, {})",
            rule.alpha_exp, rule.beta_exp
        )));
    }
    // (u − a) = half·(1 + t), (u − b) = −half·(1 − t): the constant parts
    // carry the branch, the t-dependence is in the weight.
    let mut endpoint_const = Complex64::new(0.0, 0.0);
    for f in factors {
        if f.base_point == seg.a {
            endpoint_const += f.exponent * anchored_log(seg.a + half, seg.a, seg.branch_anchor);
        } else if f.base_point == seg.b {
            endpoint_const += f.exponent * anchored_log(seg.b - half, seg.b, seg.branch_anchor);
        }
    }
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| {
            let u = seg.point(t);
            let mut ln = endpoint_const;
            for f in &interior {
                ln += f.exponent * anchored_log(u, f.base_point, seg.branch_anchor);
            }
            (u, w * half * ln.exp())
        })
        .collect())
}

/// ∫_a^b Π(u − p_j)^{e_j} g(u) du. Factors sitting at an endpoint must carry
/// the matching rule exponent (α at b, β at a).
pub fn segment_integral(
    factors: &[PowerFactor],
    polynomial_part: impl Fn(Complex64) -> Complex64,
    seg: &Segment,
    rule: &JacobiRule,
) -> Result<Complex64> {
    Ok(segment_nodes(factors, seg, rule)?
        .into_iter()
        .map(|(u, w)| w * polynomial_part(u))
        .sum())
}

/// The path used by [`path_integral`]: the segment itself, or a two-leg
/// detour when a non-endpoint singularity is closer than the clearance.
/// All legs keep the original branch anchor.
pub fn clear_path(factors: &[PowerFactor], seg: &Segment) -> Result<Vec<Segment>> {
    let len = seg.length();
    let offenders: Vec<&PowerFactor> = factors
        .iter()
        .filter(|f| f.base_point != seg.a && f.base_point != seg.b)
        .filter(|f| seg.distance_to(f.base_point) <= D_MIN_FRACTION * len)
        .collect();
    match offenders.as_slice() {
        [] => Ok(vec![*seg]),
        [p] => {
            let p = p.base_point;
            let dir = (seg.b - seg.a) / len;
            let normal = dir * Complex64::i();
            let side = ((p - seg.a) * dir.conj()).im.signum();
            let side = if side == 0.0 { 1.0 } else { side };
            let apex = seg.branch_anchor - normal * side * (0.25 * len);
            let legs = vec![
                Segment::new(seg.a, apex)?.with_anchor(seg.branch_anchor),
                Segment::new(apex, seg.b)?.with_anchor(seg.branch_anchor),
            ];
            for leg in &legs {
                check_clear(factors, leg)?;
            }
            Ok(legs)
        }
        [_, second, ..] => Err(Error::SingularityOnContour {
            point: second.base_point,
            distance: seg.distance_to(second.base_point),
        }),
    }
}

fn check_clear(factors: &[PowerFactor], leg: &Segment) -> Result<()> {
    for f in factors {
        if f.base_point != leg.a
            && f.base_point != leg.b
            && leg.distance_to(f.base_point) <= D_MIN_FRACTION * leg.length()
        {
            return Err(Error::SingularityOnContour {
                point: f.base_point,
                distance: leg.distance_to(f.base_point),
            });
        }
    }
    Ok(())
}

/// Nodes and weights along a path of consecutive legs, each leg using an
/// `order`-point Jacobi rule matched to its endpoint exponents.
pub fn path_nodes(
    factors: &[PowerFactor],
    path: &[Segment],
    order: usize,
) -> Result<Vec<(Complex64, Complex64)>> {
    let exp_at = |p: Complex64| -> f64 {
        factors.iter().filter(|f| f.base_point == p).map(|f| f.exponent).sum()
    };
    let mut out = Vec::with_capacity(order * path.len());
    for leg in path {
        let rule = jacobi_rule(order, exp_at(leg.b), exp_at(leg.a))?;
        out.extend(segment_nodes(factors, leg, &rule)?);
    }
    Ok(out)
}

/// Integrates along a → b, replacing the straight segment by a two-leg
/// detour when an interior singularity is closer than the clearance. The
/// branch stays anchored at the straight segment's midpoint.
pub fn path_integral(
    factors: &[PowerFactor],
    polynomial_part: impl Fn(Complex64) -> Complex64,
    seg: &Segment,
    order: usize,
) -> Result<Complex64> {
    let path = clear_path(factors, seg)?;
    Ok(path_nodes(factors, &path, order)?
        .into_iter()
        .map(|(u, w)| w * polynomial_part(u))
        .sum())
}

/// Same integral along an explicit two-leg path through `apex`.
pub fn two_leg_integral(
    factors: &[PowerFactor],
    polynomial_part: impl Fn(Complex64) -> Complex64,
    seg: &Segment,
    apex: Complex64,
    order: usize,
) -> Result<Complex64> {
    let legs = [
        Segment::new(seg.a, apex)?.with_anchor(seg.branch_anchor),
        Segment::new(apex, seg.b)?.with_anchor(seg.branch_anchor),
    ];
    for leg in &legs {
        check_clear(factors, leg)?;
    }
    Ok(path_nodes(factors, &legs, order)?
        .into_iter()
        .map(|(u, w)| w * polynomial_part(u))
        .sum())
}
