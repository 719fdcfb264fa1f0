//! Trilinear coordinates, the invariant `Ī`, and the critical curve `𝒞`.
//!
//! A triangle with sides `R_j` and perimeter `p` maps to the similar
//! unit-perimeter triangle with sides `x_j = R_j / p`. Admissible points lie in
//! the triangle `Δ_Q` cut out by `x_j <= 1/2`; its edges hold the collinear
//! configurations. The plane coordinates `(alpha, beta)` put the vertex `Q3`
//! (where `x3 = 0`) at the origin with the `beta` axis through the centroid.
//!
//! In the parabolic case the stationary points of the trilinear flow form the
//! critical curve `𝒴(x) = 0`. It runs from `Q4` on edge `Q2Q3` through the
//! centroid `E` to `Q5` on edge `Q3Q1`. With counterclockwise orientation the
//! left piece `Q4E` (`x1 > x2`) expands and the right piece `EQ5` contracts.

use serde::{Deserialize, Serialize};

use crate::vortex::{Configuration, Regime, VortexStrengths};
use crate::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Sides of the unit-perimeter triangle similar to the vortex triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrilinearPoint {
    pub x: [f64; 3],
    pub gamma: i8,
}

impl TrilinearPoint {
    pub fn new(x: [f64; 3], gamma: i8) -> Self {
        Self { x, gamma }
    }

    pub fn centroid() -> Self {
        Self::new([1.0 / 3.0; 3], 1)
    }

    pub fn x1(&self) -> f64 {
        self.x[0]
    }

    pub fn x2(&self) -> f64 {
        self.x[1]
    }

    pub fn x3(&self) -> f64 {
        self.x[2]
    }

    /// Inside the closed triangle `Δ_Q` within `tol`.
    pub fn is_admissible(&self, tol: f64) -> bool {
        (self.x.iter().sum::<f64>() - 1.0).abs() <= tol
            && self.x.iter().all(|v| *v >= -tol && *v <= 0.5 + tol)
    }

    /// Largest coordinate distance to another point.
    pub fn max_distance(&self, other: &TrilinearPoint) -> f64 {
        self.x
            .iter()
            .zip(other.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// The same triangle with the opposite orientation.
    pub fn image(&self) -> Self {
        Self::new(self.x, -self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

pub fn reduce(c: &Configuration) -> Result<TrilinearPoint> {
    if !(c.p > 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "perimeter must be positive, got {}",
            c.p
        )));
    }
    Ok(TrilinearPoint::new(c.r.map(|r| r / c.p), c.gamma))
}

pub fn to_alpha_beta(x: &TrilinearPoint) -> AlphaBeta {
    AlphaBeta {
        alpha: (x.x[1] - x.x[0]) / SQRT3,
        beta: x.x[2],
    }
}

pub fn from_alpha_beta(ab: &AlphaBeta, gamma: i8) -> TrilinearPoint {
    let AlphaBeta { alpha, beta } = *ab;
    TrilinearPoint::new(
        [
            0.5 * (1.0 - beta - alpha * SQRT3),
            0.5 * (1.0 - beta + alpha * SQRT3),
            beta,
        ],
        gamma,
    )
}

/// `𝒴(x) = k2 k3 x1² + k3 k1 x2² + k1 k2 x3²`; positive above the critical
/// curve and negative below.
pub fn cal_y(x: &TrilinearPoint, s: &VortexStrengths) -> f64 {
    cal_y_of(x.x, s)
}

pub(crate) fn cal_y_of(x: [f64; 3], s: &VortexStrengths) -> f64 {
    let [x1, x2, x3] = x;
    s.k2 * s.k3 * x1 * x1 + s.k3 * s.k1 * x2 * x2 + s.k1 * s.k2 * x3 * x3
}

/// `Y = -𝒴 / k3`, the normalisation in which `𝒞` reads
/// `Y = -k2 x1² - k1 x2² + (k1 + k2) x3²` for parabolic strengths.
pub fn y_curve(x: &TrilinearPoint, s: &VortexStrengths) -> f64 {
    -cal_y(x, s) / s.k3
}

/// The invariant `Ī` labelling trilinear trajectories.
///
/// For `K = 0` this is `(x1/x3)^k2 (x2/x3)^k1`; otherwise
/// `[Σ x_j²/k_j]^{K/(2 k3)} [Π x_j^{1/k_j}]^{k1 k2}`.
pub fn ibar(x: &TrilinearPoint, s: &VortexStrengths) -> Result<f64> {
    ibar_of_sides(x.x, s)
}

pub(crate) fn ibar_of_sides(x: [f64; 3], s: &VortexStrengths) -> Result<f64> {
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::DivergentInvariant);
    }
    let [x1, x2, x3] = x;
    if s.regime() == Regime::Parabolic {
        return Ok((s.k2 * (x1 / x3).ln() + s.k1 * (x2 / x3).ln()).exp());
    }
    let k = s.as_array();
    let quad = x.iter().zip(k).map(|(x, k)| x * x / k).sum::<f64>();
    let log_prod = x.iter().zip(k).map(|(x, k)| x.ln() / k).sum::<f64>();
    let expo = s.big_k() / (2.0 * s.k3);
    if !(quad > 0.0) {
        return Err(Error::OutOfRange(format!(
            "Σ x_j²/k_j = {quad} is not positive"
        )));
    }
    Ok((expo * quad.ln() + s.k1 * s.k2 * log_prod).exp())
}

fn require_parabolic(s: &VortexStrengths) -> Result<()> {
    if s.is_parabolic() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "the critical curve exists only for K = 0 (K = {:e})",
            s.big_k()
        )))
    }
}

/// The `x1` range over which `𝒞` crosses `Δ_Q`, from `Q5` to `Q4`.
pub fn curve_domain(s: &VortexStrengths) -> Result<(f64, f64)> {
    require_parabolic(s)?;
    let q = (s.k1 * s.k1 + s.k1 * s.k2 + s.k2 * s.k2).sqrt();
    Ok(((s.k1 + s.k2 - q) / (2.0 * s.k1), 0.5))
}

/// How far past an edge of `Δ_Q` a curve point may fall, so that endpoint
/// coordinates rounded to five decimals still resolve.
pub const EDGE_SLACK: f64 = 1e-5;

/// The point of `𝒞` with the given `x1`, orientation `+1`.
pub fn curve_point(x1: f64, s: &VortexStrengths) -> Result<TrilinearPoint> {
    require_parabolic(s)?;
    if !(0.0..=0.5 + EDGE_SLACK).contains(&x1) {
        return Err(Error::OffCurveDomain { x1 });
    }
    // k2 x3² + 2 k1 (1 - x1) x3 - [k1 (1 - x1)² + k2 x1²] = 0, positive root
    let b = s.k1 * (1.0 - x1);
    let c = s.k1 * (1.0 - x1).powi(2) + s.k2 * x1 * x1;
    let x3 = c / (b + (b * b + s.k2 * c).sqrt());
    let x2 = 1.0 - x1 - x3;
    let tol = EDGE_SLACK;
    if !(x3 > 0.0 && x3 <= 0.5 + tol && x2 >= -tol && x2 <= 0.5 + tol) {
        return Err(Error::OffCurveDomain { x1 });
    }
    Ok(TrilinearPoint::new([x1, x2, x3], 1))
}

/// Residual of `𝒞` written as a conic in the `(alpha, beta)` plane,
/// `3α² - 2√3 μ αβ - 3β² + 2√3 μ α - 2β + 1` with `μ = (k1-k2)/(k1+k2)`.
pub fn curve_conic_residual(ab: &AlphaBeta, s: &VortexStrengths) -> f64 {
    let mu = (s.k1 - s.k2) / (s.k1 + s.k2);
    let AlphaBeta { alpha: a, beta: b } = *ab;
    3.0 * a * a - 2.0 * SQRT3 * mu * a * b - 3.0 * b * b + 2.0 * SQRT3 * mu * a - 2.0 * b + 1.0
}

/// The collinearity cubic
/// `f(ν) = (k1+k2)ν³ - (k1+2k2)ν² - (k1+2k3)ν + (k1+k3)`.
pub fn collinear_cubic(nu: f64, s: &VortexStrengths) -> f64 {
    let VortexStrengths { k1, k2, k3 } = *s;
    (((k1 + k2) * nu - (k1 + 2.0 * k2)) * nu - (k1 + 2.0 * k3)) * nu + (k1 + k3)
}

/// Critical points of the parabolic trilinear flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub e: TrilinearPoint,
    /// End of `𝒞` on edge `Q2Q3` (`x1 = 1/2`).
    pub q4: TrilinearPoint,
    /// End of `𝒞` on edge `Q3Q1` (`x2 = 1/2`).
    pub q5: TrilinearPoint,
    /// Saddle on edge `Q1Q2` (`x3 = 1/2`).
    pub q6: TrilinearPoint,
    /// Where the trajectory through `Q4` meets the contracting branch `EQ5`.
    pub s4: TrilinearPoint,
    pub beta4: f64,
    pub beta5: f64,
    pub i4: f64,
    pub i5: f64,
    pub i6: f64,
    /// Roots of the collinearity cubic in ascending order: `ν < 0` (Q4),
    /// `ν ∈ [1/2, 1)` (Q6), `ν > 1` (Q5).
    pub nu_roots: [f64; 3],
}

/// Collinear triangle `z3 - z1 = ν (z2 - z1)` scaled to unit perimeter.
fn collinear_point(nu: f64) -> TrilinearPoint {
    let r = [(1.0 - nu).abs(), nu.abs(), 1.0];
    let p = r.iter().sum::<f64>();
    TrilinearPoint::new(r.map(|v| v / p), 1)
}

pub fn critical_points(s: &VortexStrengths) -> Result<CriticalPoints> {
    require_parabolic(s)?;
    let VortexStrengths { k1, k2, .. } = *s;
    let q = (k1 * k1 + k1 * k2 + k2 * k2).sqrt();
    let nu6 = k1 / (k1 + k2);
    let nu4 = (k2 - q) / (k1 + k2);
    let nu5 = (k2 + q) / (k1 + k2);

    let mut q4 = collinear_point(nu4);
    let mut q5 = collinear_point(nu5);
    let mut q6 = collinear_point(nu6);
    // pin the edge coordinate exactly
    q4.x[0] = 0.5;
    q5.x[1] = 0.5;
    q6.x[2] = 0.5;

    let i4 = ibar(&q4, s)?;
    let i5 = ibar(&q5, s)?;
    let i6 = ibar(&q6, s)?;
    let s4 = locate_on_contracting_branch(i4, s)?;

    Ok(CriticalPoints {
        e: TrilinearPoint::centroid(),
        q4,
        q5,
        q6,
        s4,
        beta4: q4.x[2],
        beta5: q5.x[2],
        i4,
        i5,
        i6,
        nu_roots: [nu4, nu6, nu5],
    })
}

/// The point of the branch `EQ5` with `Ī = target`, by bisection in `x1`.
/// `Ī` falls monotonically from 1 at `E` to `Ī5` at `Q5` along this branch.
pub fn locate_on_contracting_branch(target: f64, s: &VortexStrengths) -> Result<TrilinearPoint> {
    let (x1_q5, _) = curve_domain(s)?;
    bisect_branch(target, x1_q5, 1.0 / 3.0, "EQ5", s)
}

/// The point of the branch `Q4E` with `Ī = target`. `Ī` falls from 1 at `E`
/// to `Ī4` at `Q4`, so only `Ī4 <= target <= 1` has a solution.
pub fn locate_on_expanding_branch(target: f64, s: &VortexStrengths) -> Result<TrilinearPoint> {
    bisect_branch(target, 0.5, 1.0 / 3.0, "Q4E", s)
}

fn bisect_branch(target: f64, mut lo: f64, mut hi: f64, name: &str, s: &VortexStrengths) -> Result<TrilinearPoint> {
    let level = |x1: f64| -> Result<f64> { Ok(ibar(&curve_point(x1, s)?, s)? - target) };
    let f_lo = level(lo)?;
    let f_hi = level(hi)?;
    if f_lo.abs() <= 1e-14 {
        return curve_point(lo, s);
    }
    if f_hi.abs() <= 1e-14 {
        return curve_point(hi, s);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::OutOfRange(format!("Ī = {target} does not meet the branch {name}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = level(mid)?;
        if f_mid.abs() <= 1e-14 || (hi - lo).abs() <= 1e-16 {
            return curve_point(mid, s);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    curve_point(0.5 * (lo + hi), s)
}

/// `Ī4 / Ī5` for strengths `(k1, 1)`, from direct evaluation at `Q4` and `Q5`.
pub fn i4_i5_ratio(k1: f64) -> Result<f64> {
    if !(k1 >= 1.0) {
        return Err(Error::OutOfRange(format!("k1 = {k1} is below 1")));
    }
    let s = crate::vortex::parabolic_strengths(k1, 1.0)?;
    let cp = critical_points(&s)?;
    Ok(cp.i4 / cp.i5)
}

/// `dβ/dα`, or a vertical tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope {
    Finite(f64),
    Vertical,
}

impl Slope {
    pub fn value(&self) -> Option<f64> {
        match self {
            Slope::Finite(m) => Some(*m),
            Slope::Vertical => None,
        }
    }
}

fn slope_from(num: f64, den: f64) -> Slope {
    if den.abs() <= 1e-14 * num.abs().max(1.0) {
        Slope::Vertical
    } else {
        Slope::Finite(num / den)
    }
}

/// Slope of the critical curve through `x`.
pub fn slope_curve(x: &TrilinearPoint, s: &VortexStrengths) -> Slope {
    let [x1, x2, x3] = x.x;
    let VortexStrengths { k1, k2, .. } = *s;
    slope_from(
        (k1 * x2 - k2 * x1) * SQRT3,
        2.0 * (k1 + k2) * x3 + k2 * x1 + k1 * x2,
    )
}

/// Slope of the constant-`Ī` trajectory through `x` (parabolic case).
pub fn slope_trajectory(x: &TrilinearPoint, s: &VortexStrengths) -> Slope {
    let [x1, x2, x3] = x.x;
    let VortexStrengths { k1, k2, .. } = *s;
    slope_from(
        SQRT3 * x3 * (k1 * x1 - k2 * x2),
        2.0 * (k1 + k2) * x1 * x2 + (k1 * x1 + k2 * x2) * x3,
    )
}

/// `Ī` range of the strip of trajectories that meet `𝒞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripBounds {
    /// The trajectory tangent to `𝒞` at `E` (`Ī = 1`), bounding the strip
    /// from below.
    pub ibar_lower: f64,
    /// The trajectory through `Q5`, bounding the strip from above.
    pub ibar_upper: f64,
    /// The trajectory through `Q4`, which splits the region above `𝒞`.
    pub ibar_separatrix: f64,
}

impl StripBounds {
    pub fn contains(&self, ibar: f64) -> bool {
        ibar > self.ibar_upper && ibar < self.ibar_lower
    }
}

pub fn strip_bounds(s: &VortexStrengths) -> Result<StripBounds> {
    let cp = critical_points(s)?;
    Ok(StripBounds {
        ibar_lower: 1.0,
        ibar_upper: cp.i5,
        ibar_separatrix: cp.i4,
    })
}
