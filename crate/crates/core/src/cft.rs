//! Parameter algebra of the κ-dependent boundary CFT and its Coulomb-gas
//! representation.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The SLE parameter, restricted to the dilute range 2 < κ < 4.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Kappa(f64);

impl Kappa {
    /// κ = 8/3, self-avoiding walk, c = 0.
    pub const SAW: Kappa = Kappa(8.0 / 3.0);

    pub fn new(kappa: f64) -> Result<Self> {
        if kappa.is_finite() && kappa > 2.0 && kappa < 4.0 {
            Ok(Kappa(kappa))
        } else {
            Err(Error::KappaOutOfRange(kappa))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// α₊ = 2/√κ.
    pub fn alpha_plus(self) -> f64 {
        2.0 / self.0.sqrt()
    }

    /// α₋ = −√κ/2.
    pub fn alpha_minus(self) -> f64 {
        -self.0.sqrt() / 2.0
    }

    /// Background charge α₀ = (α₊ + α₋)/2.
    pub fn alpha_zero(self) -> f64 {
        0.5 * (self.alpha_plus() + self.alpha_minus())
    }

    pub fn is_saw(self) -> bool {
        (self.0 - 8.0 / 3.0).abs() < 1e-14
    }
}

impl Default for Kappa {
    fn default() -> Self {
        Kappa::SAW
    }
}

impl TryFrom<f64> for Kappa {
    type Error = Error;
    fn try_from(k: f64) -> Result<Self> {
        Kappa::new(k)
    }
}

impl From<Kappa> for f64 {
    fn from(k: Kappa) -> f64 {
        k.0
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Kac table label (r, s) with both entries nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KacLabel {
    r: i32,
    s: i32,
}

impl KacLabel {
    pub const IDENTITY: KacLabel = KacLabel { r: 1, s: 1 };
    /// Bulk twist field Φ₂,₁.
    pub const TWIST: KacLabel = KacLabel { r: 2, s: 1 };
    /// Boundary one-leg field Φ₁,₂.
    pub const ONE_LEG: KacLabel = KacLabel { r: 1, s: 2 };
    /// Two-leg field Φ₃,₁ governing the Green's function.
    pub const TWO_LEG: KacLabel = KacLabel { r: 3, s: 1 };

    pub fn new(r: i32, s: i32) -> Result<Self> {
        if r == 0 || s == 0 {
            Err(Error::InvalidKacLabel { r, s })
        } else {
            Ok(KacLabel { r, s })
        }
    }

    pub fn r(self) -> i32 {
        self.r
    }

    pub fn s(self) -> i32 {
        self.s
    }

    /// (−r, −s), whose charge is the conjugate 2α₀ − α.
    pub fn reflected(self) -> KacLabel {
        KacLabel { r: -self.r, s: -self.s }
    }
}

/// A Coulomb-gas charge α.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Charge(pub f64);

impl Charge {
    pub fn value(self) -> f64 {
        self.0
    }

    /// The conjugate charge 2α₀ − α, which has the same dimension.
    pub fn conjugate(self, k: Kappa) -> Charge {
        Charge(2.0 * k.alpha_zero() - self.0)
    }
}

/// A point strictly inside the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct HalfPlanePoint(Complex64);

impl HalfPlanePoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
            Ok(HalfPlanePoint(z))
        } else {
            Err(Error::NotInUpperHalfPlane(z))
        }
    }

    pub fn from_xy(x: f64, y: f64) -> Result<Self> {
        Self::new(Complex64::new(x, y))
    }

    pub fn z(self) -> Complex64 {
        self.0
    }

    pub fn x(self) -> f64 {
        self.0.re
    }

    pub fn y(self) -> f64 {
        self.0.im
    }
}

impl TryFrom<(f64, f64)> for HalfPlanePoint {
    type Error = Error;
    fn try_from((x, y): (f64, f64)) -> Result<Self> {
        HalfPlanePoint::from_xy(x, y)
    }
}

impl From<HalfPlanePoint> for (f64, f64) {
    fn from(p: HalfPlanePoint) -> (f64, f64) {
        (p.x(), p.y())
    }
}

/// A boundary anchor: a real number or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

impl BoundaryPoint {
    pub fn finite(self) -> Option<f64> {
        match self {
            BoundaryPoint::Finite(x) => Some(x),
            BoundaryPoint::Infinity => None,
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Finite(x) => write!(f, "{x}"),
            BoundaryPoint::Infinity => f.write_str("inf"),
        }
    }
}

/// The two boundary points x₁, x₂ where the trace starts and ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFrame {
    x1: BoundaryPoint,
    x2: BoundaryPoint,
}

impl BoundaryFrame {
    /// The canonical frame x₁ = 0, x₂ = ∞.
    pub const CANONICAL: BoundaryFrame = BoundaryFrame {
        x1: BoundaryPoint::Finite(0.0),
        x2: BoundaryPoint::Infinity,
    };

    pub fn new(x1: BoundaryPoint, x2: BoundaryPoint) -> Result<Self> {
        match (x1, x2) {
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => Err(Error::DegenerateFrame(
                "both anchors at infinity".into(),
            )),
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) if a == b => {
                Err(Error::DegenerateFrame(format!("x1 = x2 = {a}")))
            }
            (BoundaryPoint::Finite(a), _) | (_, BoundaryPoint::Finite(a)) if !a.is_finite() => {
                Err(Error::DegenerateFrame(format!("non-finite anchor {a}")))
            }
            _ => Ok(BoundaryFrame { x1, x2 }),
        }
    }

    pub fn finite(x1: f64, x2: f64) -> Result<Self> {
        Self::new(BoundaryPoint::Finite(x1), BoundaryPoint::Finite(x2))
    }

    pub fn x1(self) -> BoundaryPoint {
        self.x1
    }

    pub fn x2(self) -> BoundaryPoint {
        self.x2
    }

    pub fn is_canonical(self) -> bool {
        self == Self::CANONICAL
    }

    /// A real Möbius map f taking this frame to (0, ∞) and preserving ℍ.
    pub fn to_canonical(self) -> FrameMap {
        match (self.x1, self.x2) {
            (BoundaryPoint::Finite(a), BoundaryPoint::Infinity) => FrameMap::Shift(a),
            (BoundaryPoint::Infinity, BoundaryPoint::Finite(b)) => FrameMap::Inversion(b),
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => FrameMap::Ratio {
                x1: a,
                x2: b,
                sign: (a - b).signum(),
            },
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => unreachable!("rejected by new"),
        }
    }
}

impl fmt::Display for BoundaryFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

/// Real Möbius map sending a frame to the canonical (0, ∞) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameMap {
    /// s ↦ s − a
    Shift(f64),
    /// s ↦ −1/(s − b)
    Inversion(f64),
    /// s ↦ sign·(s − x₁)/(s − x₂)
    Ratio { x1: f64, x2: f64, sign: f64 },
}

impl FrameMap {
    pub fn apply(self, s: Complex64) -> Complex64 {
        match self {
            FrameMap::Shift(a) => s - a,
            FrameMap::Inversion(b) => -(s - b).inv(),
            FrameMap::Ratio { x1, x2, sign } => (s - x1) / (s - x2) * sign,
        }
    }

    /// f⁻¹(w).
    pub fn invert(self, w: Complex64) -> Complex64 {
        match self {
            FrameMap::Shift(a) => w + a,
            FrameMap::Inversion(b) => b - w.inv(),
            FrameMap::Ratio { x1, x2, sign } => (w * sign * x2 - x1) / (w * sign - 1.0),
        }
    }

    /// |f′(s)|.
    pub fn derivative_abs(self, s: Complex64) -> f64 {
        match self {
            FrameMap::Shift(_) => 1.0,
            FrameMap::Inversion(b) => 1.0 / (s - b).norm_sqr(),
            FrameMap::Ratio { x1, x2, .. } => (x1 - x2).abs() / (s - x2).norm_sqr(),
        }
    }
}

/// c = (6 − κ)(3κ − 8)/(2κ).
pub fn central_charge(k: Kappa) -> f64 {
    let k = k.value();
    (6.0 - k) * (3.0 * k - 8.0) / (2.0 * k)
}

/// h_{r,s} = ((κr − 4s)² − (κ − 4)²)/(16κ).
pub fn kac_weight(label: KacLabel, k: Kappa) -> f64 {
    let kv = k.value();
    let (r, s) = (label.r as f64, label.s as f64);
    ((kv * r - 4.0 * s).powi(2) - (kv - 4.0).powi(2)) / (16.0 * kv)
}

/// α_{r,s} = (1 − r)α₋/2 + (1 − s)α₊/2.
pub fn charge_of(label: KacLabel, k: Kappa) -> Charge {
    let (r, s) = (label.r as f64, label.s as f64);
    Charge(0.5 * (1.0 - r) * k.alpha_minus() + 0.5 * (1.0 - s) * k.alpha_plus())
}

/// h_α = α(α − 2α₀).
pub fn vertex_dimension(c: Charge, k: Kappa) -> f64 {
    c.0 * (c.0 - 2.0 * k.alpha_zero())
}

/// Σα − 2α₀; a vertex correlator is nonzero only when this vanishes.
pub fn neutrality_defect(charges: &[Charge], k: Kappa) -> f64 {
    charges.iter().map(|c| c.0).sum::<f64>() - 2.0 * k.alpha_zero()
}

/// η(s) = (z₁ − s)(x₁ − x₂)/((z₁ − x₁)(s − x₂)), with infinite anchors handled
/// as limits.
pub fn cross_ratio(s: Complex64, z1: Complex64, frame: BoundaryFrame) -> Result<Complex64> {
    match (frame.x1, frame.x2) {
        (BoundaryPoint::Finite(x1), BoundaryPoint::Finite(x2)) => {
            if x1 == x2 {
                return Err(Error::DegenerateFrame(format!("x1 = x2 = {x1}")));
            }
            if s == Complex64::new(x2, 0.0) {
                return Err(Error::InvalidInput("s coincides with x2".into()));
            }
            Ok((z1 - s) * (x1 - x2) / ((z1 - x1) * (s - x2)))
        }
        (BoundaryPoint::Finite(x1), BoundaryPoint::Infinity) => Ok((z1 - s) / (z1 - x1)),
        (BoundaryPoint::Infinity, BoundaryPoint::Finite(x2)) => {
            if s == Complex64::new(x2, 0.0) {
                return Err(Error::InvalidInput("s coincides with x2".into()));
            }
            Ok((s - z1) / (s - x2))
        }
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => {
            Err(Error::DegenerateFrame("both anchors at infinity".into()))
        }
    }
}
