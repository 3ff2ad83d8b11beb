//! Evaluation of coupled screening sums
//!
//!   Σ_{a₁…aₙ} Π_k F_k[a_k] · Π_{k<l} (u_{k,a_k} − u_{l,a_l})^γ
//!
//! by full tensor product (cost ~ Π N_k, organised so the innermost contour
//! costs two multiplies per node) or by importance sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Quadrature nodes of one screening variable with all single-variable
/// factors folded into the weights.
#[derive(Debug, Clone, Default)]
pub struct ContourNodes {
    pub u: Vec<Complex64>,
    pub weight: Vec<Complex64>,
}

impl ContourNodes {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn push(&mut self, u: Complex64, w: Complex64) {
        self.u.push(u);
        self.weight.push(w);
    }
}

/// ln(u − v) = offset + Log((u − v)/reference).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingBranch {
    reference: Complex64,
    offset: Complex64,
}

impl CouplingBranch {
    /// Principal log of sign·(u − v).
    pub fn signed(sign: f64) -> Self {
        CouplingBranch { reference: Complex64::new(sign, 0.0), offset: Complex64::new(0.0, 0.0) }
    }

    /// Principal log at `reference`, continued.
    pub fn anchored(reference: Complex64) -> Self {
        CouplingBranch { reference, offset: reference.ln() }
    }

    #[inline]
    pub fn log(&self, d: Complex64) -> Complex64 {
        self.offset + (d / self.reference).ln()
    }

    #[inline]
    pub fn power(&self, d: Complex64, exponent: f64) -> Complex64 {
        (exponent * self.log(d)).exp()
    }
}

/// Branches for every pair k < l, stored row-major in the upper triangle.
#[derive(Debug, Clone)]
pub struct PairBranches {
    n: usize,
    table: Vec<CouplingBranch>,
}

impl PairBranches {
    pub fn new(n: usize, f: impl Fn(usize, usize) -> CouplingBranch) -> Self {
        let mut table = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for k in 0..n {
            for l in k + 1..n {
                table.push(f(k, l));
            }
        }
        PairBranches { n, table }
    }

    fn index(&self, k: usize, l: usize) -> usize {
        debug_assert!(k < l && l < self.n);
        k * (2 * self.n - k - 1) / 2 + (l - k - 1)
    }

    pub fn get(&self, k: usize, l: usize) -> CouplingBranch {
        self.table[self.index(k, l)]
    }
}

struct Couplings {
    /// Flat N_k × N_l matrices for k < l.
    mats: Vec<Vec<Complex64>>,
    branches: PairBranches,
    cols: Vec<usize>,
}

impl Couplings {
    fn build(contours: &[ContourNodes], branches: PairBranches, exponent: f64) -> Self {
        let n = contours.len();
        let mut mats = Vec::with_capacity(branches.table.len());
        for k in 0..n {
            for l in k + 1..n {
                let br = branches.get(k, l);
                let (uk, ul) = (&contours[k].u, &contours[l].u);
                let m: Vec<Complex64> = uk
                    .par_iter()
                    .flat_map_iter(|&a| ul.iter().map(move |&b| br.power(a - b, exponent)))
                    .collect();
                mats.push(m);
            }
        }
        Couplings { mats, branches, cols: contours.iter().map(|c| c.len()).collect() }
    }

    #[inline]
    fn row(&self, k: usize, l: usize, a: usize) -> &[Complex64] {
        let m = &self.mats[self.branches.index(k, l)];
        let w = self.cols[l];
        &m[a * w..(a + 1) * w]
    }
}

/// Full tensor-product sum. The outer index runs in parallel; partial sums
/// are collected and added in index order, so the result does not depend on
/// the thread schedule.
pub fn tensor_sum(contours: &[ContourNodes], branches: PairBranches, exponent: f64) -> Complex64 {
    let n = contours.len();
    match n {
        0 => return Complex64::new(1.0, 0.0),
        1 => return contours[0].weight.iter().sum(),
        _ => {}
    }
    let cpl = Couplings::build(contours, branches, exponent);
    let partial: Vec<Complex64> = (0..contours[0].len())
        .into_par_iter()
        .map_init(
            || Scratch::new(contours),
            |scr, a| {
                let f = contours[0].weight[a];
                if f == Complex64::new(0.0, 0.0) {
                    return f;
                }
                for m in 1..n {
                    let row = cpl.row(0, m, a);
                    for ((dst, &w), &c) in scr.buf[1][m].iter_mut().zip(&contours[m].weight).zip(row) {
                        *dst = w * c;
                    }
                }
                f * level_sum(&cpl, scr, 1, n)
            },
        )
        .collect();
    partial.iter().sum()
}

struct Scratch {
    /// buf[level][m]: weights of contour m with couplings to the nodes chosen
    /// at levels < `level` multiplied in.
    buf: Vec<Vec<Vec<Complex64>>>,
}

impl Scratch {
    fn new(contours: &[ContourNodes]) -> Self {
        let n = contours.len();
        let buf = (0..n)
            .map(|level| {
                (0..n)
                    .map(|m| if m >= level { vec![Complex64::new(0.0, 0.0); contours[m].len()] } else { Vec::new() })
                    .collect()
            })
            .collect();
        Scratch { buf }
    }
}

fn level_sum(cpl: &Couplings, scr: &mut Scratch, level: usize, n: usize) -> Complex64 {
    if level == n - 1 {
        return scr.buf[level][level].iter().sum();
    }
    if level == n - 2 {
        let last = n - 1;
        let cur = &scr.buf[level];
        let mut total = Complex64::new(0.0, 0.0);
        for (a, &f) in cur[level].iter().enumerate() {
            let row = cpl.row(level, last, a);
            let inner: Complex64 = cur[last].iter().zip(row).map(|(&w, &c)| w * c).sum();
            total += f * inner;
        }
        return total;
    }
    let mut total = Complex64::new(0.0, 0.0);
    let len = scr.buf[level][level].len();
    for a in 0..len {
        let f = scr.buf[level][level][a];
        {
            let (lo, hi) = scr.buf.split_at_mut(level + 1);
            let cur = &lo[level];
            let next = &mut hi[0];
            for m in level + 1..n {
                let row = cpl.row(level, m, a);
                for ((dst, &w), &c) in next[m].iter_mut().zip(&cur[m]).zip(row) {
                    *dst = w * c;
                }
            }
        }
        total += f * level_sum(cpl, scr, level + 1, n);
    }
    total
}

/// Mean and standard error of an importance-sampled estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledSum {
    pub mean: Complex64,
    pub std_err: f64,
    pub samples: usize,
}

const CHUNK: usize = 4096;

/// Importance-sampled estimate of the same sum: each index is drawn
/// independently with probability ∝ |F_k[a]|. Chunks use independent
/// ChaCha streams keyed by (seed, chunk index).
pub fn sampled_sum(
    contours: &[ContourNodes],
    branches: &PairBranches,
    exponent: f64,
    samples: usize,
    seed: u64,
) -> SampledSum {
    let n = contours.len();
    let tables: Vec<(Vec<f64>, f64)> = contours
        .iter()
        .map(|c| {
            let mut acc = 0.0;
            let cum: Vec<f64> = c
                .weight
                .iter()
                .map(|w| {
                    acc += w.norm();
                    acc
                })
                .collect();
            (cum, acc)
        })
        .collect();
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(Complex64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut idx = vec![0usize; n];
            let mut sum = Complex64::new(0.0, 0.0);
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let mut x = Complex64::new(1.0, 0.0);
                for k in 0..n {
                    let (cum, total) = &tables[k];
                    let r = rng.random::<f64>() * total;
                    let a = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
                    idx[k] = a;
                    let w = contours[k].weight[a];
                    x *= w / w.norm() * *total;
                }
                for k in 0..n {
                    for l in k + 1..n {
                        let d = contours[k].u[idx[k]] - contours[l].u[idx[l]];
                        x *= branches.get(k, l).power(d, exponent);
                    }
                }
                sum += x;
                sum_sq += x.norm_sqr();
            }
            (sum, sum_sq, count)
        })
        .collect();
    let (mut sum, mut sum_sq, mut count) = (Complex64::new(0.0, 0.0), 0.0, 0usize);
    for (s, q, c) in parts {
        sum += s;
        sum_sq += q;
        count += c;
    }
    let nf = count as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean.norm_sqr()).max(0.0);
    SampledSum { mean, std_err: (var / nf).sqrt(), samples: count }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toy(n: usize, len: usize) -> Vec<ContourNodes> {
        (0..n)
            .map(|k| {
                let mut cn = ContourNodes::default();
                for a in 0..len {
                    let t = a as f64 / len as f64;
                    cn.push(c(3.0 * k as f64 + t, 0.5 + t * t), c(0.2 + t, 0.1 * k as f64 - t));
                }
                cn
            })
            .collect()
    }

    fn brute(contours: &[ContourNodes], br: &PairBranches, g: f64) -> Complex64 {
        let n = contours.len();
        let mut idx = vec![0usize; n];
        let mut total = c(0.0, 0.0);
        loop {
            let mut x = c(1.0, 0.0);
            for k in 0..n {
                x *= contours[k].weight[idx[k]];
                for l in k + 1..n {
                    x *= br.get(k, l).power(contours[k].u[idx[k]] - contours[l].u[idx[l]], g);
                }
            }
            total += x;
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < contours[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == n {
                    return total;
                }
            }
        }
    }

    #[test]
    fn tensor_matches_brute_force() {
        for n in 1..=4 {
            let cs = toy(n, 5);
            let br = PairBranches::new(n, |k, l| CouplingBranch::signed(if k < l { -1.0 } else { 1.0 }));
            let want = brute(&cs, &br, 4.0 / 3.0);
            let got = tensor_sum(&cs, br, 4.0 / 3.0);
            assert!((got - want).norm() < 1e-12 * want.norm(), "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn sampling_is_unbiased_and_reproducible() {
        let cs = toy(3, 6);
        let br = PairBranches::new(3, |_, _| CouplingBranch::anchored(c(-3.0, 0.1)));
        let exact = tensor_sum(&cs, br.clone(), 4.0 / 3.0);
        let s = sampled_sum(&cs, &br, 4.0 / 3.0, 200_000, 11);
        assert!((s.mean - exact).norm() < 4.0 * s.std_err, "{} vs {exact} ± {}", s.mean, s.std_err);
        assert_eq!(s, sampled_sum(&cs, &br, 4.0 / 3.0, 200_000, 11));
    }

    #[test]
    fn pair_index_is_dense() {
        let br = PairBranches::new(5, |k, l| CouplingBranch::signed((10 * k + l) as f64));
        let mut seen = vec![];
        for k in 0..5 {
            for l in k + 1..5 {
                seen.push(br.index(k, l));
                assert_eq!(br.get(k, l), CouplingBranch::signed((10 * k + l) as f64));
            }
        }
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
    }
}
