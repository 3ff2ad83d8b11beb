use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kappa = {0} is outside the dilute range (2, 4)")]
    KappaOutOfRange(f64),
    #[error("Kac label ({r}, {s}) has a zero component")]
    InvalidKacLabel { r: i32, s: i32 },
    #[error("point {0} is not in the upper half-plane")]
    NotInUpperHalfPlane(Complex64),
    #[error("degenerate boundary frame: {0}")]
    DegenerateFrame(String),
    #[error("gamma function pole at {0}")]
    GammaPole(Complex64),
    #[error("hypergeometric evaluation failed: {0}")]
    Hypergeometric(String),
    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),
    #[error("singularity at {point} lies within {distance:.3e} of the contour; deform the path")]
    SingularityOnContour { point: Complex64, distance: f64 },
    #[error("charge neutrality violated, defect {0:.3e}")]
    NeutralityViolated(f64),
    #[error("coincident points: {0}")]
    CoincidentPoints(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("extrapolation failed: {0}")]
    Extrapolation(String),
    #[error("inconsistent weights: {0}")]
    InconsistentWeights(String),
    #[error("no correlator value supplied for subset {0:#b}")]
    MissingSubset(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("Monte Carlo resolution: {0}")]
    Resolution(String),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Hypergeometric(_)
                | Error::SingularityOnContour { .. }
                | Error::Quadrature(_)
                | Error::Extrapolation(_)
                | Error::InconsistentWeights(_)
                | Error::Resolution(_)
        )
    }
}
