//! Special functions and quadrature kernels.

pub mod gamma;
pub mod hyp;
pub mod jacobi;
pub mod richardson;
pub mod segment;

pub use gamma::{beta, digamma, gamma, gamma_fn, ln_gamma, rgamma};
pub use hyp::{hyp2f1, hyp2f1_complement};
pub use jacobi::{jacobi_rule, legendre_rule, JacobiRule};
pub use richardson::{richardson_limit, Extrapolation};
pub use segment::{
    anchored_log, clear_path, path_integral, path_nodes, segment_integral, segment_nodes,
    PowerFactor, Segment,
};
