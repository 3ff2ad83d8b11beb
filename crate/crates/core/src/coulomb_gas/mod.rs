//! Screened vertex-operator correlators.
//!
//! A block is a list of vertex insertions plus screening contours whose
//! charges make the total charge 2α₀. The integrand is the free-boson
//! product Π (p_i − p_j)^{2α_iα_j}; correlators are contour integrals of it
//! over the screening positions.

mod contours;
mod eta_plane;
mod green_blocks;
mod hn;
mod tensor;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cft::{charge_of, kac_weight, neutrality_defect, Charge, KacLabel};
use crate::numerics::{anchored_log, gamma, Segment};
use crate::{BoundaryFrame, Error, Kappa, Result};

pub use contours::Layout;
pub use eta_plane::{h1_cg, jn_integral};
pub use green_blocks::{green1_block, green1_reduction, green2_block};
pub use hn::{canonical_ratio, canonical_ratio_on, hn_cg, hn_cg_with, CanonicalRatio, HnOptions};
pub use tensor::{sampled_sum, tensor_sum, ContourNodes, CouplingBranch, PairBranches, SampledSum};

/// Where a vertex operator sits; insertions at infinity drop out of the
/// pairwise product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Position {
    Finite(Complex64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexInsertion {
    pub position: Position,
    pub charge: Charge,
    pub label: KacLabel,
}

impl VertexInsertion {
    pub fn new(position: Position, label: KacLabel, k: Kappa) -> Self {
        VertexInsertion { position, charge: charge_of(label, k), label }
    }

    /// The conjugate operator V_{2α₀−α}, labelled by (−r, −s).
    pub fn reflected(position: Position, label: KacLabel, k: Kappa) -> Self {
        VertexInsertion { position, charge: charge_of(label.reflected(), k), label: label.reflected() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScreeningSign {
    /// Q⁺, charge α₊.
    Plus,
    /// Q⁻, charge α₋.
    Minus,
}

impl ScreeningSign {
    pub fn charge(self, k: Kappa) -> Charge {
        match self {
            ScreeningSign::Plus => Charge(k.alpha_plus()),
            ScreeningSign::Minus => Charge(k.alpha_minus()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningContour {
    pub endpoints: (Complex64, Complex64),
    pub sign: ScreeningSign,
    pub path: Vec<Segment>,
}

impl ScreeningContour {
    /// The straight path between two insertion points.
    pub fn straight(a: Complex64, b: Complex64, sign: ScreeningSign) -> Result<Self> {
        Ok(ScreeningContour { endpoints: (a, b), sign, path: vec![Segment::new(a, b)?] })
    }

    fn anchor(&self) -> Complex64 {
        self.path.first().map(|s| s.branch_anchor).unwrap_or(0.5 * (self.endpoints.0 + self.endpoints.1))
    }
}

/// Insertions plus screenings satisfying charge neutrality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    insertions: Vec<VertexInsertion>,
    contours: Vec<ScreeningContour>,
    frame: BoundaryFrame,
    kappa: Kappa,
}

impl BlockSpec {
    pub fn new(
        insertions: Vec<VertexInsertion>,
        contours: Vec<ScreeningContour>,
        frame: BoundaryFrame,
        kappa: Kappa,
    ) -> Result<Self> {
        let mut charges: Vec<Charge> = insertions.iter().map(|v| v.charge).collect();
        charges.extend(contours.iter().map(|c| c.sign.charge(kappa)));
        let defect = neutrality_defect(&charges, kappa);
        if defect.abs() > 1e-12 {
            return Err(Error::NeutralityViolated(defect));
        }
        for c in &contours {
            let (a, b) = c.endpoints;
            let first = c.path.first().map(|s| s.a);
            let last = c.path.last().map(|s| s.b);
            if first != Some(a) || last != Some(b) || c.path.windows(2).any(|w| w[0].b != w[1].a) {
                return Err(Error::InvalidInput("screening path does not join its endpoints".into()));
            }
        }
        Ok(BlockSpec { insertions, contours, frame, kappa })
    }

    pub fn insertions(&self) -> &[VertexInsertion] {
        &self.insertions
    }

    pub fn contours(&self) -> &[ScreeningContour] {
        &self.contours
    }

    pub fn frame(&self) -> BoundaryFrame {
        self.frame
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    /// Π_{i<j} (p_i − p_j)^{2α_iα_j} over finite insertions and the given
    /// screening positions. Insertion pairs use principal logs; factors
    /// involving a screening variable are anchored at its contour's anchor
    /// point, and screening pairs at the difference of their anchors.
    pub fn integrand(&self, u: &[Complex64]) -> Result<Complex64> {
        if u.len() != self.contours.len() {
            return Err(Error::InvalidInput(format!(
                "{} screening positions for {} contours",
                u.len(),
                self.contours.len()
            )));
        }
        let finite: Vec<(Complex64, f64)> = self
            .insertions
            .iter()
            .filter_map(|v| match v.position {
                Position::Finite(p) => Some((p, v.charge.value())),
                Position::Infinity => None,
            })
            .collect();
        let mut log = Complex64::new(0.0, 0.0);
        for (i, &(p, a)) in finite.iter().enumerate() {
            for &(q, b) in &finite[i + 1..] {
                if p == q {
                    return Err(Error::CoincidentPoints(format!("two insertions at {p}")));
                }
                log += 2.0 * a * b * (p - q).ln();
            }
        }
        let screen: Vec<f64> = self.contours.iter().map(|c| c.sign.charge(self.kappa).value()).collect();
        for (k, (&uk, c)) in u.iter().zip(&self.contours).enumerate() {
            for &(p, a) in &finite {
                if uk == p {
                    return Err(Error::CoincidentPoints(format!("screening variable on insertion {p}")));
                }
                log += 2.0 * a * screen[k] * anchored_log(uk, p, c.anchor());
            }
            for (l, (&ul, d)) in u.iter().zip(&self.contours).enumerate().skip(k + 1) {
                if uk == ul {
                    return Err(Error::CoincidentPoints("two screening variables coincide".into()));
                }
                let reference = c.anchor() - d.anchor();
                let reference = if reference == Complex64::new(0.0, 0.0) { Complex64::new(1.0, 0.0) } else { reference };
                log += 2.0 * screen[k] * screen[l] * CouplingBranch::anchored(reference).log(uk - ul);
            }
        }
        Ok(log.exp())
    }
}

/// N₁ = e^{2iπh₂,₁} Γ(2 − κ/2)/Γ(1 − κ/4)²; N_n = N₁ⁿ.
pub fn n1_constant(k: Kappa) -> Result<Complex64> {
    let kv = k.value();
    let h21 = kac_weight(KacLabel::TWIST, k);
    let g = gamma(1.0 - kv / 4.0)?;
    let modulus = gamma(2.0 - kv / 2.0)? / (g * g);
    Ok(Complex64::from_polar(modulus, 2.0 * std::f64::consts::PI * h21))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gamma_fn;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn n1_values() {
        let n = n1_constant(Kappa::SAW).unwrap();
        let want = gamma_fn(2.0 / 3.0).unwrap() / gamma_fn(1.0 / 3.0).unwrap().powi(2);
        assert!((n - want).norm() < 1e-14);
        let n = n1_constant(Kappa::new(3.0).unwrap()).unwrap();
        let want = Complex64::from_polar(1.0, std::f64::consts::PI / 8.0) * std::f64::consts::PI.sqrt()
            / crate::numerics::gamma(0.25).unwrap().powi(2);
        assert!((n - want).norm() < 1e-14);
    }

    fn one_screening(eta: Complex64, k: Kappa) -> BlockSpec {
        let ins = vec![
            VertexInsertion::new(Position::Finite(c(0.0, 0.0)), KacLabel::TWIST, k),
            VertexInsertion::new(Position::Finite(eta), KacLabel::TWIST, k),
            VertexInsertion::new(Position::Finite(c(1.0, 0.0)), KacLabel::ONE_LEG, k),
            VertexInsertion::reflected(Position::Infinity, KacLabel::ONE_LEG, k),
        ];
        let contour = ScreeningContour::straight(c(0.0, 0.0), eta, ScreeningSign::Minus).unwrap();
        BlockSpec::new(ins, vec![contour], BoundaryFrame::finite(1.0, 2.0).unwrap(), k).unwrap()
    }

    #[test]
    fn one_screening_integrand_is_j1_kernel() {
        for kv in [8.0 / 3.0, 3.0] {
            let k = Kappa::new(kv).unwrap();
            let eta = c(1.0, 1.0);
            let spec = one_screening(eta, k);
            let mid = 0.5 * eta;
            let kernel = |u: Complex64| {
                (-kv / 4.0 * (anchored_log(u, c(0.0, 0.0), mid) + anchored_log(u, eta, mid))).exp() * (1.0 - u)
            };
            let ratios: Vec<Complex64> = [0.1, 0.4, 0.77]
                .iter()
                .map(|&t| {
                    let u = eta * t + c(0.0, 0.05);
                    spec.integrand(&[u]).unwrap() / kernel(u)
                })
                .collect();
            assert!((ratios[0] - ratios[1]).norm() < 1e-12 * ratios[0].norm());
            assert!((ratios[0] - ratios[2]).norm() < 1e-12 * ratios[0].norm());
        }
    }

    #[test]
    fn neutrality_gate() {
        let k = Kappa::SAW;
        let ins = vec![
            VertexInsertion::new(Position::Finite(c(0.0, 0.0)), KacLabel::ONE_LEG, k),
            VertexInsertion::new(Position::Finite(c(1.0, 0.0)), KacLabel::ONE_LEG, k),
        ];
        let frame = BoundaryFrame::finite(0.0, 1.0).unwrap();
        assert!(matches!(BlockSpec::new(ins, vec![], frame, k), Err(Error::NeutralityViolated(_))));
        // with the reflected partner the boundary pair alone is neutral
        let ins = vec![
            VertexInsertion::new(Position::Finite(c(0.0, 0.0)), KacLabel::ONE_LEG, k),
            VertexInsertion::reflected(Position::Finite(c(1.0, 0.0)), KacLabel::ONE_LEG, k),
        ];
        let spec = BlockSpec::new(ins, vec![], frame, k).unwrap();
        // 2α₁,₂α₋₁,₋₂ = −2h₁,₂: reproduces H₀ = (x₂ − x₁)^{−2h₁,₂}
        let v = spec.integrand(&[]).unwrap();
        let want = (c(-1.0, 0.0)).powf(-2.0 * kac_weight(KacLabel::ONE_LEG, k));
        assert!((v - want).norm() < 1e-14, "{v} vs {want}");
    }

    #[test]
    fn n_twist_pairs_need_n_screenings() {
        let k = Kappa::SAW;
        for n in 1..=4 {
            let mut ins = Vec::new();
            let mut contours = Vec::new();
            for j in 0..n {
                let z = c(j as f64, 1.0);
                ins.push(VertexInsertion::new(Position::Finite(z), KacLabel::TWIST, k));
                ins.push(VertexInsertion::new(Position::Finite(z.conj()), KacLabel::TWIST, k));
                contours.push(ScreeningContour::straight(z, z.conj(), ScreeningSign::Minus).unwrap());
            }
            ins.push(VertexInsertion::new(Position::Finite(c(-5.0, 0.0)), KacLabel::ONE_LEG, k));
            ins.push(VertexInsertion::reflected(Position::Infinity, KacLabel::ONE_LEG, k));
            let frame = BoundaryFrame::CANONICAL;
            assert!(BlockSpec::new(ins.clone(), contours.clone(), frame, k).is_ok());
            contours.pop();
            assert!(BlockSpec::new(ins, contours, frame, k).is_err());
        }
    }
}
