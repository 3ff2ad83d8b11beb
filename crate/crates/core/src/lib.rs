//! Winding probabilities of the chordal SLE(8/3) trace around marked points of
//! the upper half-plane, computed from screened Coulomb-gas integrals, plus the
//! one- and two-point SLE Green's functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`cft`]: central charge, Kac weights, Coulomb-gas charges, cross-ratios.
//! * [`numerics`]: Gamma, ₂F₁, Gauss–Jacobi rules, singular segment quadrature,
//!   Richardson extrapolation.
//! * [`closed_forms`]: Schramm and Simmons–Cardy probabilities, H₀, H₁ and the
//!   one-point Green's function in closed form.
//! * [`coulomb_gas`]: the multi-fold screening integrals and the correlators Hₙ.
//! * [`winding`]: the signed transform from correlators to pattern weights.
//! * [`green`]: Green's functions by extrapolation and by direct blocks.
//! * [`sle_mc`]: an independent Loewner-evolution Monte Carlo sampler.

pub mod cft;
pub mod closed_forms;
pub mod coulomb_gas;
mod error;
pub mod green;
pub mod numerics;
pub mod sle_mc;
pub mod winding;

pub use cft::{BoundaryFrame, BoundaryPoint, Charge, HalfPlanePoint, KacLabel, Kappa};
pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Library version string embedded in CLI provenance records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
