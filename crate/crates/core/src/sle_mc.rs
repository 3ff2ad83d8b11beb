//! Monte Carlo chordal SLE by discretised Loewner evolution.
//!
//! Each step draws δW = √(κ dt)·ξ and applies the vertical-slit map
//! Z ↦ √((Z − δW)² + 4dt) to every tracked Z = g_t(z) − W_t. A point is
//! resolved once its angle seen from the tip, Im Z/|Z|, drops below
//! `swallow_tol`; its side is then the sign of Re Z. For the near-passage
//! estimate the quantity Im Z/|g′_t(z)| (half the conformal radius of z in
//! the slit domain) is carried along and its final value compared with ε.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::winding::{WindingPattern, MAX_POINTS};
use crate::{Error, HalfPlanePoint, Kappa, Result};

/// Sign of Re Z that means "separated from [x₁, x₂]"; with it the point
/// 1 + i is separated with probability 1/2 + √2/4.
pub const SEPARATED_SIDE: f64 = 1.0;

/// Upper bound on Loewner steps per sample before it is excluded.
const MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeStep {
    Fixed(f64),
    /// dt = scale·min|Z|² over unresolved points, clamped to [min, max].
    Adaptive { scale: f64, min: f64, max: f64 },
}

impl TimeStep {
    /// The floor of the step, used for resolution checks.
    fn finest(self) -> f64 {
        match self {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Adaptive { min, .. } => min,
        }
    }

    fn validate(self) -> Result<()> {
        let ok = match self {
            TimeStep::Fixed(dt) => dt > 0.0 && dt.is_finite(),
            TimeStep::Adaptive { scale, min, max } => scale > 0.0 && min > 0.0 && max >= min && max.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid time step {self:?}")))
        }
    }
}

impl Default for TimeStep {
    fn default() -> Self {
        TimeStep::Adaptive { scale: 2e-3, min: 1e-14, max: 1e-1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub kappa: Kappa,
    pub n_samples: usize,
    pub dt: TimeStep,
    pub t_max: f64,
    pub seed: u64,
    /// Angle threshold Im Z/|Z| below which a point counts as resolved.
    pub swallow_tol: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            kappa: Kappa::SAW,
            n_samples: 100_000,
            dt: TimeStep::default(),
            t_max: 1e8,
            seed: 0,
            swallow_tol: 1e-3,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidInput("n_samples must be at least 1".into()));
        }
        if !(self.t_max > 0.0) || !(self.swallow_tol > 0.0 && self.swallow_tol < 1.0) {
            return Err(Error::InvalidInput("t_max must be positive and swallow_tol in (0, 1)".into()));
        }
        self.dt.validate()
    }
}

/// A Bernoulli frequency with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
    pub seed: u64,
}

impl Estimate {
    fn bernoulli(hits: usize, n: usize, seed: u64) -> Self {
        let mean = hits as f64 / n as f64;
        Estimate { mean, std_err: (mean * (1.0 - mean) / n as f64).sqrt(), n, seed }
    }
}

/// Per-sample side masks; `None` marks a sample that did not resolve every
/// point before t_max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideSamples {
    pub points: usize,
    pub masks: Vec<Option<u32>>,
}

impl SideSamples {
    pub fn excluded(&self) -> usize {
        self.masks.iter().filter(|m| m.is_none()).count()
    }

    pub fn exclusion_rate(&self) -> f64 {
        self.excluded() as f64 / self.masks.len() as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct Tracked {
    z: Complex64,
    /// |g′_t(z)|, carried only for near-passage runs.
    deriv: f64,
    resolved: bool,
}

/// The result of one Loewner trace for a set of points.
struct Trace {
    complete: bool,
    tracked: Vec<Tracked>,
}

fn run_trace(points: &[HalfPlanePoint], cfg: &McConfig, sample: u64, with_deriv: bool) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(sample);
    let sqrt_kappa = cfg.kappa.value().sqrt();
    let mut tracked: Vec<Tracked> = points.iter().map(|p| Tracked { z: p.z(), deriv: 1.0, resolved: false }).collect();
    let mut t = 0.0;
    let mut steps = 0;
    loop {
        let mut nearest = f64::INFINITY;
        for p in tracked.iter_mut().filter(|p| !p.resolved) {
            if p.z.im < cfg.swallow_tol * p.z.norm() {
                p.resolved = true;
            } else {
                nearest = nearest.min(p.z.norm_sqr());
            }
        }
        if nearest.is_infinite() {
            return Trace { complete: true, tracked };
        }
        if t >= cfg.t_max || steps >= MAX_STEPS {
            return Trace { complete: false, tracked };
        }
        let dt = match cfg.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Adaptive { scale, min, max } => (scale * nearest).clamp(min, max),
        };
        let xi: f64 = rng.sample(StandardNormal);
        let dw = sqrt_kappa * dt.sqrt() * xi;
        for p in tracked.iter_mut().filter(|p| !p.resolved) {
            let shifted = p.z - dw;
            let mut root = (shifted * shifted + 4.0 * dt).sqrt();
            if root.im < 0.0 {
                root = -root;
            }
            if with_deriv {
                p.deriv *= (shifted / root).norm();
            }
            p.z = root;
        }
        t += dt;
        steps += 1;
    }
}

/// Which side of the trace each point ends up on, one mask per sample
/// (bit i set ⇔ point i separated). Samples run in parallel on
/// independent streams keyed by (seed, sample index).
pub fn simulate_side(points: &[HalfPlanePoint], cfg: &McConfig) -> Result<SideSamples> {
    cfg.validate()?;
    if points.is_empty() || points.len() > MAX_POINTS {
        return Err(Error::InvalidInput(format!("need 1 to {MAX_POINTS} points, got {}", points.len())));
    }
    let masks = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let trace = run_trace(points, cfg, i, false);
            trace.complete.then(|| {
                trace
                    .tracked
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.z.re * SEPARATED_SIDE > 0.0)
                    .fold(0u32, |m, (j, _)| m | 1 << j)
            })
        })
        .collect();
    Ok(SideSamples { points: points.len(), masks })
}

/// Frequency of one pattern among all samples; excluded samples count as
/// misses, so the eight N = 3 estimates sum to 1 − exclusion rate.
pub fn pattern_frequency(samples: &SideSamples, pattern: WindingPattern, seed: u64) -> Result<Estimate> {
    if pattern.points() != samples.points {
        return Err(Error::InvalidInput(format!(
            "pattern on {} points for samples on {}",
            pattern.points(),
            samples.points
        )));
    }
    let hits = samples.masks.iter().filter(|m| **m == Some(pattern.separated())).count();
    Ok(Estimate::bernoulli(hits, samples.masks.len(), seed))
}

pub fn estimate_pattern(points: &[HalfPlanePoint], pattern: WindingPattern, cfg: &McConfig) -> Result<Estimate> {
    pattern_frequency(&simulate_side(points, cfg)?, pattern, cfg.seed)
}

/// For each ε the frequency with which the trace comes within ε of z, in
/// the sense that Im g/|g′| at z ends below ε.
pub fn estimate_near_passage(z: HalfPlanePoint, eps_list: &[f64], cfg: &McConfig) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    for &eps in eps_list {
        if !(eps > 0.0) || eps >= z.y() {
            return Err(Error::InvalidInput(format!("ε = {eps} must lie in (0, Im z = {})", z.y())));
        }
        let step = (cfg.kappa.value() * cfg.dt.finest()).sqrt();
        if step > eps / 4.0 {
            return Err(Error::Resolution(format!("driving step {step:.2e} is coarser than ε/4 = {:.2e}", eps / 4.0)));
        }
    }
    let radii: Vec<Option<f64>> = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let trace = run_trace(&[z], cfg, i, true);
            trace.complete.then(|| trace.tracked[0].z.im / trace.tracked[0].deriv)
        })
        .collect();
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let hits = radii.iter().filter(|r| r.is_some_and(|r| r < eps)).count();
            Estimate::bernoulli(hits, radii.len(), cfg.seed)
        })
        .collect())
}
