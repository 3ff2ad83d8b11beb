//! Winding-pattern weights from subset correlators.
//!
//! For N marked points let h_I = H_|I|(Z_I)/H₀ for every subset I. The weight
//! of the pattern whose separated set is S is
//!
//!   Π_S = 2^{−N} Σ_I (−1)^{#(S ∩ I)} σ^{|I|} h_I,
//!
//! a Walsh–Hadamard transform of σ^{|I|}h_I. The orientation sign σ = −1 is
//! the one for which "separated" at z = 1 + i has probability 1/2 + √2/4.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::ProbabilityValue;
use crate::coulomb_gas::{canonical_ratio, HnOptions};
use crate::cft::{kac_weight, KacLabel};
use crate::{BoundaryFrame, Error, HalfPlanePoint, Kappa, Result};

/// Largest number of marked points handled.
pub const MAX_POINTS: usize = 16;

/// Sign relating the Walsh character of a subset to "separated".
pub const ORIENTATION: f64 = -1.0;

/// Relative slack for weights just outside [0, H₀].
pub const WEIGHT_TOL: f64 = 1e-9;

/// Which of N points the trace separates from [x₁, x₂]: bit i set ⇔ point i
/// separated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindingPattern {
    points: usize,
    separated: u32,
}

impl WindingPattern {
    pub fn new(points: usize, separated: u32) -> Result<Self> {
        if points > MAX_POINTS {
            return Err(Error::InvalidInput(format!("at most {MAX_POINTS} points, got {points}")));
        }
        if u64::from(separated) >> points != 0 {
            return Err(Error::InvalidInput(format!("pattern {separated:#b} has bits beyond {points} points")));
        }
        Ok(WindingPattern { points, separated })
    }

    pub fn all_separated(points: usize) -> Result<Self> {
        Self::new(points, ((1u64 << points) - 1) as u32)
    }

    pub fn points(self) -> usize {
        self.points
    }

    pub fn separated(self) -> u32 {
        self.separated
    }

    pub fn is_separated(self, i: usize) -> bool {
        self.separated >> i & 1 == 1
    }

    /// The pattern with every bit flipped.
    pub fn complement(self) -> Self {
        WindingPattern { points: self.points, separated: !self.separated & self.full_mask() }
    }

    fn full_mask(self) -> u32 {
        ((1u64 << self.points) - 1) as u32
    }

    /// Every pattern on `points` points in mask order.
    pub fn all(points: usize) -> Result<impl Iterator<Item = WindingPattern>> {
        Self::new(points, 0)?;
        Ok((0..1u32 << points).map(move |separated| WindingPattern { points, separated }))
    }
}

/// Pattern weights Π_S with their sum H₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    points: usize,
    pub weights: Vec<f64>,
    pub h0: f64,
}

impl WeightVector {
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn weight(&self, pattern: WindingPattern) -> f64 {
        self.weights[pattern.separated as usize]
    }

    /// h_I recovered from the weights: σ^{|I|} Σ_S (−1)^{#(S ∩ I)} Π_S.
    pub fn reassemble(&self) -> Vec<f64> {
        let mut h = self.weights.clone();
        walsh(&mut h);
        for (mask, v) in h.iter_mut().enumerate() {
            *v *= orientation_power(mask);
        }
        h
    }
}

fn orientation_power(mask: usize) -> f64 {
    ORIENTATION.powi(mask.count_ones() as i32)
}

/// In-place unnormalised Walsh–Hadamard transform.
fn walsh(v: &mut [f64]) {
    let mut half = 1;
    while half < v.len() {
        for block in v.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

/// Weights from subset correlators `h[mask]`, with `h[0]` = H₀. `None`
/// marks a subset whose value was not supplied.
pub fn correlators_to_weights(h: &[Option<f64>]) -> Result<WeightVector> {
    let len = h.len();
    if !len.is_power_of_two() {
        return Err(Error::InvalidInput(format!("{len} subset values is not a power of two")));
    }
    let points = len.trailing_zeros() as usize;
    WindingPattern::new(points, 0)?;
    let mut g = Vec::with_capacity(len);
    for (mask, v) in h.iter().enumerate() {
        let v = v.ok_or(Error::MissingSubset(mask))?;
        g.push(orientation_power(mask) * v);
    }
    let h0 = g[0];
    walsh(&mut g);
    let norm = 1.0 / len as f64;
    g.iter_mut().for_each(|w| *w *= norm);
    Ok(WeightVector { points, weights: g, h0 })
}

/// Π_S/H₀, clamped when within [`WEIGHT_TOL`]·H₀ of [0, 1].
pub fn pattern_probability(wv: &WeightVector, pattern: WindingPattern) -> Result<ProbabilityValue> {
    if pattern.points != wv.points {
        return Err(Error::InvalidInput(format!(
            "pattern on {} points used with weights on {}",
            pattern.points, wv.points
        )));
    }
    ProbabilityValue::clamped(wv.weight(pattern) / wv.h0, WEIGHT_TOL)
}

/// The ratios h_I = H_|I|(Z_I)/H₀ for every subset of a point set, each
/// evaluated once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetCorrelators {
    pub kappa: Kappa,
    pub frame: BoundaryFrame,
    pub points: Vec<HalfPlanePoint>,
    /// Indexed by subset mask; entry 0 is 1.
    pub ratios: Vec<f64>,
    /// Estimated absolute error per entry.
    pub errors: Vec<f64>,
}

impl SubsetCorrelators {
    /// Evaluates all 2^N − 1 nonempty subsets in parallel.
    pub fn compute(points: &[HalfPlanePoint], frame: BoundaryFrame, k: Kappa, opts: &HnOptions) -> Result<Self> {
        Self::compute_masks(points, frame, k, opts, |_| true)
    }

    /// Evaluates only the subsets accepted by `wanted`; others are left as NaN.
    fn compute_masks(
        points: &[HalfPlanePoint],
        frame: BoundaryFrame,
        k: Kappa,
        opts: &HnOptions,
        wanted: impl Fn(usize) -> bool + Sync,
    ) -> Result<Self> {
        WindingPattern::new(points.len(), 0)?;
        let map = frame.to_canonical();
        let h21 = kac_weight(KacLabel::TWIST, k);
        let mapped: Vec<Complex64> = points.iter().map(|p| map.apply(p.z())).collect();
        let jac: Vec<f64> = points.iter().map(|p| map.derivative_abs(p.z()).powf(2.0 * h21)).collect();
        for (i, p) in mapped.iter().enumerate() {
            if mapped[..i].contains(p) {
                return Err(Error::CoincidentPoints(format!("marked point {} repeated", points[i].z())));
            }
        }
        let len = 1usize << points.len();
        let evaluated = (1..len)
            .into_par_iter()
            .filter(|&m| wanted(m))
            .map(|mask| {
                let subset: Vec<Complex64> = (0..points.len()).filter(|i| mask >> i & 1 == 1).map(|i| mapped[i]).collect();
                let scale: f64 = (0..points.len()).filter(|i| mask >> i & 1 == 1).map(|i| jac[i]).product();
                let r = canonical_ratio(&subset, k, opts)?;
                Ok((mask, r.value.re * scale, (r.error + r.value.im.abs()) * scale))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ratios = vec![f64::NAN; len];
        let mut errors = vec![0.0; len];
        ratios[0] = 1.0;
        for (mask, v, e) in evaluated {
            ratios[mask] = v;
            errors[mask] = e;
        }
        Ok(SubsetCorrelators { kappa: k, frame, points: points.to_vec(), ratios, errors })
    }

    pub fn weights(&self) -> Result<WeightVector> {
        let h: Vec<Option<f64>> = self.ratios.iter().map(|v| v.is_finite().then_some(*v)).collect();
        correlators_to_weights(&h)
    }

    /// Bound on the error of any single pattern or marginal probability:
    /// each is a ±2^{−N}-weighted sum of the h_I.
    pub fn probability_error(&self) -> f64 {
        self.errors.iter().sum::<f64>() / self.ratios.len() as f64
    }
}

/// A probability with its propagated quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageProbability {
    pub probability: ProbabilityValue,
    pub error_estimate: f64,
}

/// Probability that every point in `required` is separated, whatever the
/// others do.
pub fn marginal_probability(wv: &WeightVector, required: u32) -> Result<ProbabilityValue> {
    let total: f64 = wv
        .weights
        .iter()
        .enumerate()
        .filter(|(mask, _)| *mask as u32 & required == required)
        .map(|(_, w)| w)
        .sum();
    ProbabilityValue::clamped(total / wv.h0, WEIGHT_TOL)
}

/// Probability that the SLE(8/3) trace separates all the points from [x₁, x₂].
pub fn left_passage(points: &[HalfPlanePoint], frame: BoundaryFrame, opts: &HnOptions) -> Result<PassageProbability> {
    if points.is_empty() {
        return Err(Error::InvalidInput("left passage needs at least one point".into()));
    }
    let sc = SubsetCorrelators::compute(points, frame, Kappa::SAW, opts)?;
    let wv = sc.weights()?;
    Ok(PassageProbability {
        probability: pattern_probability(&wv, WindingPattern::all_separated(points.len())?)?,
        error_estimate: sc.probability_error(),
    })
}

/// Probability that the trace passes between the two points of every pair,
/// i.e. separates exactly one point of each. Only subsets made of whole
/// pairs contribute, so the orientation sign drops out:
///
///   P = 2^{−m} Σ_{T ⊆ pairs} (−1)^{|T|} H_{2|T|}(∪T)/H₀.
pub fn passage_between(
    pairs: &[(HalfPlanePoint, HalfPlanePoint)],
    frame: BoundaryFrame,
    opts: &HnOptions,
) -> Result<PassageProbability> {
    let m = pairs.len();
    if m == 0 || 2 * m > MAX_POINTS {
        return Err(Error::InvalidInput(format!("need between 1 and {} pairs, got {m}", MAX_POINTS / 2)));
    }
    let points: Vec<HalfPlanePoint> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let whole_pairs = |mask: usize| (0..m).all(|p| (mask >> (2 * p) & 3) % 3 == 0);
    let sc = SubsetCorrelators::compute_masks(&points, frame, Kappa::SAW, opts, whole_pairs)?;
    let mut total = 0.0;
    let mut error = 0.0;
    for (mask, (v, e)) in sc.ratios.iter().zip(&sc.errors).enumerate() {
        if whole_pairs(mask) {
            let sign = if mask.count_ones() % 4 == 0 { 1.0 } else { -1.0 };
            total += sign * v;
            error += e;
        }
    }
    let scale = 0.5f64.powi(m as i32);
    Ok(PassageProbability {
        probability: ProbabilityValue::clamped(total * scale, WEIGHT_TOL)?,
        error_estimate: error * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{schramm_probability, simmons_cardy_two_point};
    use proptest::prelude::*;

    fn hp(x: f64, y: f64) -> HalfPlanePoint {
        HalfPlanePoint::from_xy(x, y).unwrap()
    }

    fn opts() -> HnOptions {
        HnOptions { error_probe: false, ..HnOptions::with_order(16) }
    }

    #[test]
    fn one_and_two_point_formulas() {
        let wv = correlators_to_weights(&[Some(1.0), Some(0.3)]).unwrap();
        // separated ↔ the (H₀ + H₁)/2 weight
        assert!((wv.weights[1] - 0.65).abs() < 1e-15);
        assert!((wv.weights[0] - 0.35).abs() < 1e-15);
        let h = [1.0, 0.2, -0.4, 0.1];
        let wv = correlators_to_weights(&h.map(Some)).unwrap();
        assert!((wv.weights[0] - (1.0 - 0.2 + 0.4 + 0.1) / 4.0).abs() < 1e-15);
        assert!((wv.weights[3] - (1.0 + 0.2 - 0.4 + 0.1) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn missing_subset_is_reported() {
        let e = correlators_to_weights(&[Some(1.0), Some(0.2), None, Some(0.0)]).unwrap_err();
        assert_eq!(e, Error::MissingSubset(2));
        assert!(correlators_to_weights(&[Some(1.0); 3]).is_err());
    }

    #[test]
    fn orientation_calibration() {
        let p = left_passage(&[hp(1.0, 1.0)], BoundaryFrame::CANONICAL, &opts()).unwrap();
        assert!((p.probability.value() - (0.5 + 0.5f64.sqrt() / 2.0)).abs() < 1e-10);
        let p = left_passage(&[hp(0.0, 2.3)], BoundaryFrame::CANONICAL, &opts()).unwrap();
        assert!((p.probability.value() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn left_passage_matches_closed_forms() {
        for (z, w) in [(hp(0.0, 1.0), hp(0.0, 2.0)), (hp(-0.8, 0.6), hp(1.1, 1.4))] {
            let p = left_passage(&[z, w], BoundaryFrame::CANONICAL, &opts()).unwrap();
            let want = simmons_cardy_two_point(z, w).unwrap().value();
            assert!((p.probability.value() - want).abs() < 1e-8, "{} vs {want}", p.probability.value());
        }
        let z = hp(0.7, 0.9);
        let frame = BoundaryFrame::finite(-1.0, 2.0).unwrap();
        let p = left_passage(&[z], frame, &opts()).unwrap().probability.value();
        let canon = HalfPlanePoint::new(frame.to_canonical().apply(z.z())).unwrap();
        assert!((p - schramm_probability(canon, Kappa::SAW).unwrap().value()).abs() < 1e-10);
    }

    #[test]
    fn three_points_partition_and_mirror() {
        let pts = [hp(0.4, 1.0), hp(-0.6, 0.7), hp(1.2, 1.9)];
        let mirrored: Vec<_> = pts.iter().map(|p| hp(-p.x(), p.y())).collect();
        let a = SubsetCorrelators::compute(&pts, BoundaryFrame::CANONICAL, Kappa::SAW, &opts()).unwrap().weights().unwrap();
        let b = SubsetCorrelators::compute(&mirrored, BoundaryFrame::CANONICAL, Kappa::SAW, &opts()).unwrap().weights().unwrap();
        let mut sum = 0.0;
        for pat in WindingPattern::all(3).unwrap() {
            let p = pattern_probability(&a, pat).unwrap().value();
            let q = pattern_probability(&b, pat.complement()).unwrap().value();
            assert!((p - q).abs() < 1e-9);
            sum += p;
        }
        assert!((sum - 1.0).abs() < 1e-9);
        // event containment
        for s in 0..8u32 {
            for sub in 0..8u32 {
                if sub & s == sub {
                    assert!(marginal_probability(&a, s).unwrap().value() <= marginal_probability(&a, sub).unwrap().value() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn passage_between_one_pair() {
        let (z, w) = (hp(-0.5, 1.0), hp(0.5, 1.0));
        let p = passage_between(&[(z, w)], BoundaryFrame::CANONICAL, &opts()).unwrap().probability.value();
        let sc = SubsetCorrelators::compute(&[z, w], BoundaryFrame::CANONICAL, Kappa::SAW, &opts()).unwrap();
        let wv = sc.weights().unwrap();
        assert!((p - (wv.weights[1] + wv.weights[2])).abs() < 1e-12);
        assert!((p - (0.5 - sc.ratios[3] / 2.0)).abs() < 1e-14);
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn pattern_on_wrong_size_is_rejected() {
        let wv = correlators_to_weights(&[Some(1.0), Some(0.1)]).unwrap();
        assert!(pattern_probability(&wv, WindingPattern::new(2, 1).unwrap()).is_err());
        assert!(WindingPattern::new(2, 4).is_err());
        assert!(WindingPattern::new(17, 0).is_err());
    }

    #[test]
    fn inconsistent_weights_are_not_clamped() {
        let wv = correlators_to_weights(&[Some(1.0), Some(1.1)]).unwrap();
        assert!(matches!(pattern_probability(&wv, WindingPattern::new(1, 0).unwrap()), Err(Error::InconsistentWeights(_))));
        let wv = correlators_to_weights(&[Some(1.0), Some(1.0 + 1e-10)]).unwrap();
        assert_eq!(pattern_probability(&wv, WindingPattern::new(1, 0).unwrap()).unwrap().value(), 0.0);
    }

    proptest! {
        #[test]
        fn roundtrip_is_identity(n in 0usize..=8, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let h: Vec<f64> = (0..1usize << n).map(|m| if m == 0 { 1.0 } else { rng.random_range(-1.0..1.0) }).collect();
            let wv = correlators_to_weights(&h.iter().copied().map(Some).collect::<Vec<_>>()).unwrap();
            let back = wv.reassemble();
            for (a, b) in h.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-13);
            }
            prop_assert!((wv.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }
}
