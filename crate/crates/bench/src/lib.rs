//! Shared fixtures for the criterion benchmarks.

use num_complex::Complex64;
use slewind::HalfPlanePoint;

/// Well-separated marked points used across the correlator benchmarks.
pub fn reference_points(n: usize) -> Vec<HalfPlanePoint> {
    [(0.5, 1.0), (-0.7, 0.8), (1.3, 1.6), (-1.6, 1.9)]
        .iter()
        .take(n)
        .map(|&(x, y)| HalfPlanePoint::new(Complex64::new(x, y)).unwrap())
        .collect()
}
