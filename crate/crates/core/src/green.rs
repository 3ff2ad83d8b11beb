//! SLE(8/3) Green's functions, normalised so that G(i) = 1 in the (0, ∞)
//! frame.
//!
//! Extrapolation route: the probability that the trace passes between
//! z ∓ εν/2 behaves like (C₃,₁)² ε^{2/3} G(z). With two such pairs of sizes
//! ε and δ around z and w the passage probability behaves like
//! (C₃,₁)⁴ ε^{2/3} δ^{2/3} G(z, w). The constant (C₃,₁)² is fitted once at
//! z = i.
//!
//! Direct route: the residue block of the one-point screened correlator.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::green1_closed;
use crate::coulomb_gas::{green1_block, green2_block, HnOptions};
use crate::numerics::{richardson_limit, Extrapolation};
use crate::winding::passage_between;
use crate::{BoundaryFrame, Error, HalfPlanePoint, Result};

/// Scaling exponent of the passage probability of one collapsing pair.
pub const PAIR_EXPONENT: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GreenMethod {
    Extrapolation,
    DirectBlock,
}

/// The fitted OPE constant (C₃,₁)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpeCalibration {
    pub c31_squared: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenEstimate {
    pub value: f64,
    pub method: GreenMethod,
    pub error_estimate: f64,
    /// (C₃,₁)² divided out, when the method needed it.
    pub calibration: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenOptions {
    pub hn: HnOptions,
    /// Pair sizes as fractions of the local length scale, geometric.
    pub ladder: Vec<f64>,
    /// Collapse direction ν, |ν| = 1.
    pub direction: Complex64,
    /// Reused instead of refitting when present.
    pub calibration: Option<OpeCalibration>,
    /// Gauss order of the direct residue block.
    pub block_order: usize,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            hn: HnOptions { error_probe: false, ..HnOptions::with_order(16) },
            ladder: vec![0.1, 0.05, 0.025, 0.0125],
            direction: Complex64::new(1.0, 0.0),
            calibration: None,
            block_order: 48,
        }
    }
}

impl GreenOptions {
    fn checked_direction(&self) -> Result<Complex64> {
        let n = self.direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput(format!("collapse direction {} has no length", self.direction)));
        }
        Ok(self.direction / n)
    }
}

fn split(z: HalfPlanePoint, eps: f64, nu: Complex64) -> Result<(HalfPlanePoint, HalfPlanePoint)> {
    let d = nu * (eps / 2.0);
    Ok((HalfPlanePoint::new(z.z() - d)?, HalfPlanePoint::new(z.z() + d)?))
}

/// Passage probabilities for the pair z ∓ εν/2 along the ladder.
pub fn pair_ladder(z: HalfPlanePoint, frame: BoundaryFrame, opts: &GreenOptions) -> Result<Vec<(f64, f64)>> {
    let nu = opts.checked_direction()?;
    opts.ladder
        .par_iter()
        .map(|f| {
            let eps = f * z.y();
            let pair = split(z, eps, nu)?;
            let p = passage_between(&[pair], frame, &opts.hn)?;
            Ok((eps, p.probability.value()))
        })
        .collect()
}

/// lim ε^{−2/3} P(pass between z ∓ εν/2) = (C₃,₁)² G(z).
fn one_point_limit(z: HalfPlanePoint, frame: BoundaryFrame, opts: &GreenOptions) -> Result<Extrapolation> {
    richardson_limit(&pair_ladder(z, frame, opts)?, PAIR_EXPONENT)
}

/// Fits (C₃,₁)² at the point of `frame` that corresponds to i.
pub fn calibrate_c31(frame: BoundaryFrame, opts: &GreenOptions) -> Result<OpeCalibration> {
    let map = frame.to_canonical();
    let at = HalfPlanePoint::new(map.invert(Complex64::new(0.0, 1.0)))?;
    let limit = one_point_limit(at, frame, opts)?;
    let target = map.derivative_abs(at.z()).powf(PAIR_EXPONENT);
    let c31_squared = limit.limit / target;
    if !(c31_squared > 0.0) {
        return Err(Error::Extrapolation(format!("fitted (C31)^2 = {c31_squared} is not positive")));
    }
    Ok(OpeCalibration { c31_squared, error_estimate: limit.error_estimate / target })
}

fn calibration(opts: &GreenOptions) -> Result<OpeCalibration> {
    match opts.calibration {
        Some(c) => Ok(c),
        None => calibrate_c31(BoundaryFrame::CANONICAL, opts),
    }
}

/// Relative error of a quotient from the errors of its parts.
fn quotient_error(value: f64, num: f64, num_err: f64, den: f64, den_err: f64) -> f64 {
    value.abs() * (num_err / num.abs() + den_err / den.abs())
}

fn nonnegative(e: GreenEstimate) -> Result<GreenEstimate> {
    if e.value < -e.error_estimate {
        return Err(Error::Extrapolation(format!(
            "Green's function estimate {} is negative beyond its error {}",
            e.value, e.error_estimate
        )));
    }
    Ok(GreenEstimate { value: e.value.max(0.0), ..e })
}

pub fn green1(z: HalfPlanePoint, frame: BoundaryFrame, method: GreenMethod, opts: &GreenOptions) -> Result<GreenEstimate> {
    let estimate = match method {
        GreenMethod::Extrapolation => {
            let cal = calibration(opts)?;
            let limit = one_point_limit(z, frame, opts)?;
            let value = limit.limit / cal.c31_squared;
            GreenEstimate {
                value,
                method,
                error_estimate: quotient_error(value, limit.limit, limit.error_estimate, cal.c31_squared, cal.error_estimate),
                calibration: Some(cal.c31_squared),
            }
        }
        GreenMethod::DirectBlock => {
            let fine = green1_block(z, frame, opts.block_order)?;
            let coarse = green1_block(z, frame, (opts.block_order * 2 / 3).max(4))?;
            GreenEstimate {
                value: fine.re,
                method,
                error_estimate: (fine - coarse).norm() + fine.im.abs(),
                calibration: None,
            }
        }
    };
    nonnegative(estimate)
}

/// Passage probability through both pairs z ∓ εν/2 and w ∓ δν/2.
fn double_pair(
    z: HalfPlanePoint,
    w: HalfPlanePoint,
    eps: f64,
    delta: f64,
    frame: BoundaryFrame,
    opts: &GreenOptions,
) -> Result<f64> {
    let nu = opts.checked_direction()?;
    let pairs = [split(z, eps, nu)?, split(w, delta, nu)?];
    Ok(passage_between(&pairs, frame, &opts.hn)?.probability.value())
}

/// lim ε^{−4/3} P(ε, ε), the ε = δ diagonal.
fn diagonal_limit(z: HalfPlanePoint, w: HalfPlanePoint, scale: f64, frame: BoundaryFrame, opts: &GreenOptions) -> Result<Extrapolation> {
    let samples = opts
        .ladder
        .par_iter()
        .map(|f| {
            let e = f * scale;
            Ok((e, double_pair(z, w, e, e, frame, opts)?))
        })
        .collect::<Result<Vec<_>>>()?;
    richardson_limit(&samples, 2.0 * PAIR_EXPONENT)
}

/// ε → 0 at each fixed δ, then δ → 0.
fn staged_limit(z: HalfPlanePoint, w: HalfPlanePoint, scale: f64, frame: BoundaryFrame, opts: &GreenOptions) -> Result<Extrapolation> {
    let inner = opts
        .ladder
        .par_iter()
        .map(|fd| {
            let delta = fd * scale;
            let samples = opts
                .ladder
                .iter()
                .map(|fe| {
                    let e = fe * scale;
                    Ok((e, double_pair(z, w, e, delta, frame, opts)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let x = richardson_limit(&samples, PAIR_EXPONENT)?;
            Ok(((delta, x.limit), x.error_estimate))
        })
        .collect::<Result<Vec<_>>>()?;
    let (samples, errs): (Vec<_>, Vec<_>) = inner.into_iter().unzip();
    let outer = richardson_limit(&samples, PAIR_EXPONENT)?;
    let delta_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let inner_err = errs.iter().fold(0.0f64, |m, e| m.max(*e)) / delta_min.powf(PAIR_EXPONENT);
    Ok(Extrapolation { error_estimate: outer.error_estimate + inner_err, ..outer })
}

/// Two-point Green's function. The extrapolation route uses the ε = δ
/// diagonal and falls back to staged limits if that fails to converge.
pub fn green2(
    z: HalfPlanePoint,
    w: HalfPlanePoint,
    frame: BoundaryFrame,
    method: GreenMethod,
    opts: &GreenOptions,
) -> Result<GreenEstimate> {
    if z == w {
        return Err(Error::CoincidentPoints(format!("green2 at z = w = {}", z.z())));
    }
    match method {
        GreenMethod::DirectBlock => {
            let v = green2_block(z, w, frame, opts.block_order)?;
            nonnegative(GreenEstimate { value: v.re, method, error_estimate: v.im.abs(), calibration: None })
        }
        GreenMethod::Extrapolation => {
            // pairs must stay small against each other and the boundary
            let scale = z.y().min(w.y()).min((z.z() - w.z()).norm());
            let cal = calibration(opts)?;
            let limit = match diagonal_limit(z, w, scale, frame, opts) {
                Ok(x) => x,
                Err(Error::Extrapolation(_)) => staged_limit(z, w, scale, frame, opts)?,
                Err(e) => return Err(e),
            };
            let c4 = cal.c31_squared * cal.c31_squared;
            let value = limit.limit / c4;
            nonnegative(GreenEstimate {
                value,
                method,
                error_estimate: quotient_error(value, limit.limit, limit.error_estimate, c4, 2.0 * cal.error_estimate * cal.c31_squared),
                calibration: Some(cal.c31_squared),
            })
        }
    }
}

/// What a request for the N-point Green's function resolves to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GreenNSpec {
    One(HalfPlanePoint),
    Two(HalfPlanePoint, HalfPlanePoint),
    NotImplemented { points: usize, formula: String },
}

/// Dispatches N = 1, 2 and describes the unevaluated N ≥ 3 case.
pub fn green_n_spec(points: &[HalfPlanePoint]) -> Result<GreenNSpec> {
    match points {
        [] => Err(Error::InvalidInput("no points".into())),
        [z] => Ok(GreenNSpec::One(*z)),
        [z, w] => Ok(GreenNSpec::Two(*z, *w)),
        _ => Ok(GreenNSpec::NotImplemented {
            points: points.len(),
            formula: "G(z_1..z_N) ∝ (-1)^N <Π_i Φ_{3,1}(z_i, z̄_i) Φ_{1,2}(x_1) Φ_{1,2}(x_2)> / <Φ_{1,2}(x_1) Φ_{1,2}(x_2)>; \
                      no contour prescription for the screened block is known"
                .into(),
        }),
    }
}

/// The closed-form one-point target in any frame: |f′(z)|^{2/3} G(f(z)).
pub fn green1_target(z: HalfPlanePoint, frame: BoundaryFrame) -> Result<f64> {
    let map = frame.to_canonical();
    let canon = HalfPlanePoint::new(map.apply(z.z()))?;
    Ok(map.derivative_abs(z.z()).powf(PAIR_EXPONENT) * green1_closed(canon))
}
