//! Gauss–Jacobi rules for ∫₋₁¹ (1−t)^α (1+t)^β f(t) dt.
//!
//! Nodes come from the Golub–Welsch eigenproblem and are then polished by
//! Newton steps on P_n^{(α,β)}. Heavy weights are taken from the eigenvectors
//! (they sum to the weight mass to rounding); light ones from the closed-form
//! Christoffel expression, which keeps their relative accuracy.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::gamma::ln_gamma;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiRule {
    pub order: usize,
    /// Exponent of (1 − t), the singularity at t = +1.
    pub alpha_exp: f64,
    /// Exponent of (1 + t), the singularity at t = −1.
    pub beta_exp: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    /// ∫₋₁¹ (1−t)^α (1+t)^β dt = 2^{α+β+1} B(α+1, β+1).
    pub fn moment_zero(&self) -> f64 {
        weight_mass(self.alpha_exp, self.beta_exp)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

fn weight_mass(a: f64, b: f64) -> f64 {
    let ln = (a + b + 1.0) * std::f64::consts::LN_2
        + ln_gamma(a + 1.0).unwrap()
        + ln_gamma(b + 1.0).unwrap()
        - ln_gamma(a + b + 2.0).unwrap();
    ln.exp()
}

/// P_n^{(α,β)}(x) and its derivative by the three-term recurrence.
fn jacobi_p(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut d0 = 0.0;
    if n == 0 {
        return (p0, d0);
    }
    let mut p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    let mut d1 = 0.5 * (a + b + 2.0);
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (a * a - b * b);
        let c3 = (s - 2.0) * (s - 1.0) * s;
        let c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let p2 = ((c2 + c3 * x) * p1 - c4 * p0) / c1;
        let d2 = ((c2 + c3 * x) * d1 + c3 * p1 - c4 * d0) / c1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

fn golub_welsch(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        let s = 2.0 * k + a + b;
        m[(i, i)] = if i == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if i + 1 < n {
            let k = k + 1.0;
            let s = 2.0 * k + a + b;
            let off2 = if i == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            m[(i, i + 1)] = off2.sqrt();
            m[(i + 1, i)] = off2.sqrt();
        }
    }
    let eig = SymmetricEigen::new(m);
    let mass = weight_mass(a, b);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.eigenvalues[j], mass * eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

fn build(order: usize, a: f64, b: f64) -> JacobiRule {
    let eig = golub_welsch(order, a, b);
    let mut nodes: Vec<f64> = eig.iter().map(|e| e.0).collect();
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d) = jacobi_p(order, a, b, *x);
            let step = p / d;
            let next = *x - step;
            if next > -1.0 && next < 1.0 {
                *x = next;
            }
            if step.abs() < 1e-16 {
                break;
            }
        }
    }
    let n = order as f64;
    let ln_c = ln_gamma(n + a + 1.0).unwrap() + ln_gamma(n + b + 1.0).unwrap()
        - ln_gamma(n + a + b + 1.0).unwrap()
        - ln_gamma(n + 1.0).unwrap()
        + (a + b + 1.0) * std::f64::consts::LN_2;
    let c = ln_c.exp();
    let mass = weight_mass(a, b);
    let weights = nodes
        .iter()
        .zip(&eig)
        .map(|(&x, &(_, w_eig))| {
            if w_eig > 1e-3 * mass {
                w_eig
            } else {
                let (_, d) = jacobi_p(order, a, b, x);
                c / ((1.0 - x) * (1.0 + x) * d * d)
            }
        })
        .collect();
    JacobiRule { order, alpha_exp: a, beta_exp: b, nodes, weights }
}

type RuleKey = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<JacobiRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<JacobiRule>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Gauss–Jacobi rule of the given order for weight (1−t)^α (1+t)^β.
/// Rules are memoised; the returned handle is shared.
pub fn jacobi_rule(order: usize, alpha_exp: f64, beta_exp: f64) -> Result<Arc<JacobiRule>> {
    if order == 0 {
        return Err(Error::InvalidRule("order must be at least 1".into()));
    }
    if !(alpha_exp > -1.0 && beta_exp > -1.0) {
        return Err(Error::InvalidRule(format!(
            "exponents ({alpha_exp}, {beta_exp}) must exceed -1"
        )));
    }
    if order > 2048 {
        return Err(Error::InvalidRule(format!("order {order} is unreasonably large")));
    }
    let key = (order, alpha_exp.to_bits(), beta_exp.to_bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build(order, alpha_exp, beta_exp));
    cache().lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Gauss–Legendre rule (α = β = 0).
pub fn legendre_rule(order: usize) -> Result<Arc<JacobiRule>> {
    jacobi_rule(order, 0.0, 0.0)
}
