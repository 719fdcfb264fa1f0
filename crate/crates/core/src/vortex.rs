//! Vortex strengths, positions and the vortex triangle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Band around `K = 0` treated as parabolic, relative to `k1² + k2²`.
pub const PARABOLIC_TOL: f64 = 1e-12;

/// Sides shorter than this fraction of the perimeter count as a collision.
pub const COLLISION_TOL: f64 = 1e-9;

/// Signed areas below this fraction of `p²` count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-14;

/// Vortex strengths `k_j = Γ_j / 2π`, ordered so that `k1 >= k2 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexStrengths {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl VortexStrengths {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        if !(k1.is_finite() && k2.is_finite() && k3.is_finite()) || k2 <= 0.0 || k1 < k2 {
            return Err(Error::InvalidStrengths { k1, k2 });
        }
        Ok(Self { k1, k2, k3 })
    }

    /// `K = k1 k2 + k2 k3 + k3 k1`.
    pub fn big_k(&self) -> f64 {
        self.k1 * self.k2 + self.k2 * self.k3 + self.k3 * self.k1
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }

    pub fn total(&self) -> f64 {
        self.k1 + self.k2 + self.k3
    }

    pub fn regime(&self) -> Regime {
        classify_k(self)
    }

    pub fn is_parabolic(&self) -> bool {
        self.regime() == Regime::Parabolic
    }
}

/// The parabolic closure `k3 = -k1 k2 / (k1 + k2)`.
pub fn parabolic_strengths(k1: f64, k2: f64) -> Result<VortexStrengths> {
    if !(k1.is_finite() && k2.is_finite()) || k2 <= 0.0 || k1 < k2 {
        return Err(Error::InvalidStrengths { k1, k2 });
    }
    VortexStrengths::new(k1, k2, -k1 * k2 / (k1 + k2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Elliptic => "elliptic",
            Regime::Parabolic => "parabolic",
            Regime::Hyperbolic => "hyperbolic",
        })
    }
}

pub fn classify_k(s: &VortexStrengths) -> Regime {
    let k = s.big_k();
    let band = PARABOLIC_TOL * (s.k1 * s.k1 + s.k2 * s.k2);
    if k.abs() <= band {
        Regime::Parabolic
    } else if k > 0.0 {
        Regime::Elliptic
    } else {
        Regime::Hyperbolic
    }
}

/// Time and positions of the three vortices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexState {
    pub t: f64,
    pub z: [Complex64; 3],
}

impl VortexState {
    pub fn new(t: f64, z: [Complex64; 3]) -> Self {
        Self { t, z }
    }

    /// Twice the signed area, `Im[conj(z2 - z1) (z3 - z1)]`; positive for
    /// counterclockwise order.
    pub fn twice_signed_area(&self) -> f64 {
        let [z1, z2, z3] = self.z;
        ((z2 - z1).conj() * (z3 - z1)).im
    }

    /// Side lengths, `R_j` facing vortex `j`.
    pub fn sides(&self) -> [f64; 3] {
        let [z1, z2, z3] = self.z;
        [(z2 - z3).norm(), (z3 - z1).norm(), (z1 - z2).norm()]
    }

    /// Packs positions as `[re z1, im z1, re z2, im z2, re z3, im z3]`.
    pub fn to_vector(&self) -> [f64; 6] {
        let [z1, z2, z3] = self.z;
        [z1.re, z1.im, z2.re, z2.im, z3.re, z3.im]
    }

    pub fn from_vector(t: f64, y: &[f64; 6]) -> Self {
        Self {
            t,
            z: [
                Complex64::new(y[0], y[1]),
                Complex64::new(y[2], y[3]),
                Complex64::new(y[4], y[5]),
            ],
        }
    }

    /// Reflection in the real axis; reverses the orientation.
    pub fn conjugate(&self) -> Self {
        Self {
            t: self.t,
            z: self.z.map(|z| z.conj()),
        }
    }

    /// Applies `z -> rotation * z + shift` with `|rotation| = 1`.
    pub fn rigid_motion(&self, angle: f64, shift: Complex64) -> Self {
        let rot = Complex64::from_polar(1.0, angle);
        Self {
            t: self.t,
            z: self.z.map(|z| rot * z + shift),
        }
    }
}

/// The vortex triangle: sides, perimeter, area and orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub r: [f64; 3],
    pub p: f64,
    pub area: f64,
    /// `+1` counterclockwise, `-1` clockwise, `0` collinear.
    pub gamma: i8,
}

impl Configuration {
    /// Builds a triangle from its sides. `gamma` must be `±1` unless the sides
    /// are collinear.
    pub fn from_sides(r: [f64; 3], gamma: i8) -> Result<Self> {
        if r.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidConfiguration(format!(
                "sides must be positive, got {r:?}"
            )));
        }
        let p = r.iter().sum::<f64>();
        let half = 0.5 * p;
        if r.iter().any(|v| *v > half * (1.0 + 1e-12)) {
            return Err(Error::InvalidConfiguration(format!(
                "sides {r:?} violate the triangle inequality"
            )));
        }
        if !matches!(gamma, -1..=1) {
            return Err(Error::InvalidConfiguration(format!(
                "orientation must be -1, 0 or +1, got {gamma}"
            )));
        }
        Ok(Self {
            r,
            p,
            area: heron_area(r),
            gamma,
        })
    }

    /// `γ |A|`.
    pub fn signed_area(&self) -> f64 {
        f64::from(self.gamma) * self.area
    }
}

/// Triangle area from its sides, using the cancellation-free ordering of
/// Heron's formula. Slightly inadmissible sides give zero.
pub fn heron_area(r: [f64; 3]) -> f64 {
    let mut s = r;
    s.sort_by(|a, b| b.total_cmp(a));
    let [a, b, c] = s;
    let prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if prod <= 0.0 {
        0.0
    } else {
        0.25 * prod.sqrt()
    }
}

pub fn configuration_of(state: &VortexState) -> Result<Configuration> {
    let r = state.sides();
    let p = r.iter().sum::<f64>();
    let min_side = r.iter().copied().fold(f64::INFINITY, f64::min);
    if !p.is_finite() || p <= 0.0 || min_side < COLLISION_TOL * p {
        return Err(Error::Collision {
            min_side,
            perimeter: p,
        });
    }
    let signed = 0.5 * state.twice_signed_area();
    let gamma = if signed.abs() < COLLINEAR_TOL * p * p {
        0
    } else if signed > 0.0 {
        1
    } else {
        -1
    };
    Ok(Configuration {
        r,
        p,
        area: signed.abs(),
        gamma,
    })
}

/// Conserved quantities of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    /// `Σ R_j² / k_j`.
    pub a: f64,
    /// `Π R_j^{1/k_j}`.
    pub b: f64,
    pub ibar: f64,
    /// `Σ k_j z_j / Σ k_j`; `None` when the strengths sum to zero.
    pub vorticity_center: Option<Complex64>,
    /// `Σ k_j |z_j|²`.
    pub polar_moment: f64,
}

impl Invariants {
    /// `Σ k_j z_j`, defined for every strength triple.
    pub fn linear_impulse(state: &VortexState, s: &VortexStrengths) -> Complex64 {
        state
            .z
            .iter()
            .zip(s.as_array())
            .map(|(z, k)| z * k)
            .sum()
    }
}

pub fn invariants_of(state: &VortexState, s: &VortexStrengths) -> Result<Invariants> {
    let cfg = configuration_of(state)?;
    let k = s.as_array();
    if cfg.r.iter().any(|r| *r <= 0.0) {
        return Err(Error::DegenerateConfiguration(
            "a side vanishes, b is undefined".into(),
        ));
    }
    let a = cfg.r.iter().zip(k).map(|(r, k)| r * r / k).sum::<f64>();
    let b = cfg
        .r
        .iter()
        .zip(k)
        .map(|(r, k)| r.ln() / k)
        .sum::<f64>()
        .exp();
    let x = cfg.r.map(|r| r / cfg.p);
    let ibar = crate::geometry::ibar_of_sides(x, s)?;
    let total = s.total();
    let vorticity_center = if total != 0.0 {
        Some(Invariants::linear_impulse(state, s) / total)
    } else {
        None
    };
    let polar_moment = state
        .z
        .iter()
        .zip(k)
        .map(|(z, k)| k * z.norm_sqr())
        .sum::<f64>();
    Ok(Invariants {
        a,
        b,
        ibar,
        vorticity_center,
        polar_moment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral(side: f64) -> VortexState {
        let c = side / 3f64.sqrt();
        let z = [0.0_f64, 2.0, 4.0].map(|m| Complex64::from_polar(c, m * std::f64::consts::PI / 3.0 + 0.3));
        VortexState::new(0.0, z)
    }

    #[test]
    fn parabolic_closure() {
        let s = parabolic_strengths(2.0, 1.0).unwrap();
        assert!((s.k3 + 2.0 / 3.0).abs() < 1e-15);
        assert!(s.big_k().abs() < 1e-14 * 4.0);
        let s = parabolic_strengths(1.0, 1.0).unwrap();
        assert_eq!(s.k3, -0.5);
        assert_eq!(s.big_k(), 0.0);
        let s = parabolic_strengths(3.0, 2.0).unwrap();
        assert!((s.k3 + 1.2).abs() < 1e-15);
        assert!(s.big_k().abs() < 1e-14 * 9.0);
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(matches!(
            parabolic_strengths(1.0, 2.0),
            Err(Error::InvalidStrengths { .. })
        ));
        assert!(parabolic_strengths(1.0, 0.0).is_err());
        assert!(parabolic_strengths(1.0, -1.0).is_err());
        assert!(VortexStrengths::new(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn regimes() {
        let e = VortexStrengths::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(e.big_k(), 3.0);
        assert_eq!(classify_k(&e), Regime::Elliptic);
        let h = VortexStrengths::new(1.0, 1.0, -1.0).unwrap();
        assert_eq!(h.big_k(), -1.0);
        assert_eq!(classify_k(&h), Regime::Hyperbolic);
        let p = VortexStrengths::new(2.0, 1.0, -2.0 / 3.0).unwrap();
        assert_eq!(classify_k(&p), Regime::Parabolic);
    }

    #[test]
    fn equilateral_configuration() {
        let cfg = configuration_of(&equilateral(1.0 / 3.0)).unwrap();
        for r in cfg.r {
            assert!((r - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((cfg.p - 1.0).abs() < 1e-15);
        assert_eq!(cfg.gamma, 1);
        assert!((cfg.area - heron_area(cfg.r)).abs() < 1e-12);
        assert_eq!(configuration_of(&equilateral(1.0 / 3.0).conjugate()).unwrap().gamma, -1);
    }

    #[test]
    fn collinear_reports_zero_orientation() {
        let z = [0.0, 1.0, 2.0].map(|y| Complex64::new(0.0, y));
        let cfg = configuration_of(&VortexState::new(0.0, z)).unwrap();
        assert_eq!(cfg.gamma, 0);
        assert_eq!(cfg.area, 0.0);
        assert_eq!(heron_area(cfg.r), 0.0);
    }

    #[test]
    fn coincident_vortices_collide() {
        let z = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(matches!(
            configuration_of(&VortexState::new(0.0, z)),
            Err(Error::Collision { .. })
        ));
    }

    #[test]
    fn heron_matches_cross_product() {
        let z = [
            Complex64::new(0.1, 0.7),
            Complex64::new(-0.4, 0.2),
            Complex64::new(0.9, -0.3),
        ];
        let st = VortexState::new(0.0, z);
        let cfg = configuration_of(&st).unwrap();
        assert!((cfg.area - heron_area(cfg.r)).abs() < 1e-12 * cfg.p * cfg.p);
        assert!(cfg.r.iter().all(|r| *r <= cfg.p / 2.0));
    }

    #[test]
    fn equilateral_invariants() {
        let s = parabolic_strengths(2.0, 1.0).unwrap();
        let inv = invariants_of(&equilateral(1.0 / 3.0), &s).unwrap();
        assert!((inv.ibar - 1.0).abs() < 1e-14);
        assert!((inv.ibar - inv.b.powf(s.k1 * s.k2)).abs() < 1e-10);
        assert!(inv.vorticity_center.is_some());
    }
}
