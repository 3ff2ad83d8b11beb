use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use slewind::closed_forms::schramm_probability;
use slewind::coulomb_gas::{hn_cg, tensor_sum, ContourNodes, CouplingBranch, PairBranches};
use slewind::numerics::{hyp2f1, jacobi_rule};
use slewind::sle_mc::{simulate_side, McConfig};
use slewind::{BoundaryFrame, Kappa};
use slewind_bench::reference_points;

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("jacobi_rule");
    for order in [16, 64] {
        // distinct exponents every call so the rule cache is bypassed
        let mut shift = 0.0;
        g.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, &n| {
            b.iter(|| {
                shift += 1e-9;
                jacobi_rule(n, -0.25 + shift, 0.5).unwrap()
            })
        });
    }
    g.finish();
    c.bench_function("hyp2f1", |b| b.iter(|| hyp2f1(black_box(0.5), 1.5, 1.5, black_box(-0.7)).unwrap()));
    let z = reference_points(1)[0];
    c.bench_function("schramm", |b| b.iter(|| schramm_probability(black_box(z), Kappa::SAW).unwrap()));
}

fn tensor(c: &mut Criterion) {
    let mut g = c.benchmark_group("tensor_sum");
    for n in [2usize, 3] {
        let contours: Vec<ContourNodes> = (0..n)
            .map(|k| {
                let mut nodes = ContourNodes::default();
                for j in 0..32 {
                    let t = j as f64 / 32.0;
                    nodes.push(Complex64::new(k as f64 * 3.0 + t, 1.0 - t), Complex64::new(1.0 / 32.0, 0.0));
                }
                nodes
            })
            .collect();
        let branches = PairBranches::new(n, |_, _| CouplingBranch::signed(-1.0));
        g.bench_with_input(BenchmarkId::from_parameter(n), &contours, |b, cs| {
            b.iter(|| tensor_sum(black_box(cs), branches.clone(), 8.0 / 3.0))
        });
    }
    g.finish();
}

fn correlators(c: &mut Criterion) {
    let mut g = c.benchmark_group("hn_cg");
    g.sample_size(10);
    for n in [1usize, 2] {
        let pts = reference_points(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, p| {
            b.iter(|| hn_cg(p, BoundaryFrame::CANONICAL, Kappa::SAW, 16).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    let pts = reference_points(2);
    let cfg = McConfig { n_samples: 32, ..McConfig::default() };
    g.bench_function("32_traces", |b| b.iter(|| simulate_side(black_box(&pts), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, quadrature, tensor, correlators, monte_carlo);
criterion_main!(benches);
