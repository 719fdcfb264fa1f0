//! Self-similar motion from a point of the critical curve.
//!
//! A triangle whose trilinear image lies on `𝒞` keeps its shape and changes
//! size as `p²(t) = p0² + 4γ D0 S0 t`, with
//! `D0 = (x2² - x1²)/(k1 k2)` and
//! `S0 = k1 k2 k3 √((1-2x1)(1-2x2)(1-2x3)) / (4 (x1 x2 x3)²)`.

use serde::{Deserialize, Serialize};

use crate::geometry::{cal_y, TrilinearPoint};
use crate::vortex::VortexStrengths;
use crate::{Error, Result};

/// Largest `|𝒴|` accepted as a point of `𝒞`.
pub const ON_CURVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarSolutionParams {
    pub d0: f64,
    pub s0: f64,
    pub gamma: i8,
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PerimeterValue {
    Value(f64),
    /// The triangle has shrunk to a point at `t_star`.
    Coalesced { t_star: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Growth {
    Expanding,
    Contracting,
    Stationary,
}

impl SimilarSolutionParams {
    pub fn new(x: &TrilinearPoint, s: &VortexStrengths, gamma: i8, p0: f64) -> Result<Self> {
        if !s.is_parabolic() {
            return Err(Error::Unsupported("self-similar motion on 𝒞 needs K = 0".into()));
        }
        if gamma != 1 && gamma != -1 {
            return Err(Error::UndefinedDirection);
        }
        if !(p0 > 0.0) {
            return Err(Error::OutOfRange(format!("p0 = {p0} is not positive")));
        }
        if x.x.iter().any(|v| !(*v > 0.0 && *v < 0.5)) {
            return Err(Error::InvalidConfiguration(format!(
                "{:?} is not strictly inside Δ_Q",
                x.x
            )));
        }
        let caly = cal_y(x, s);
        if caly.abs() >= ON_CURVE_TOL {
            return Err(Error::NotOnCurve { caly });
        }
        let [x1, x2, x3] = x.x;
        let VortexStrengths { k1, k2, k3 } = *s;
        let d0 = (x2 * x2 - x1 * x1) / (k1 * k2);
        let root = ((1.0 - 2.0 * x1) * (1.0 - 2.0 * x2) * (1.0 - 2.0 * x3)).sqrt();
        let s0 = k1 * k2 * k3 * root / (4.0 * (x1 * x2 * x3).powi(2));
        Ok(Self { d0, s0, gamma, p0 })
    }

    /// `d(p²)/dt`.
    pub fn rate(&self) -> f64 {
        4.0 * f64::from(self.gamma) * self.d0 * self.s0
    }

    pub fn growth(&self) -> Growth {
        let r = self.rate();
        if r > 0.0 {
            Growth::Expanding
        } else if r < 0.0 {
            Growth::Contracting
        } else {
            Growth::Stationary
        }
    }

    /// `t* = -p0² / (4γ D0 S0)` for a contracting solution.
    pub fn coalescence_time(&self) -> Option<f64> {
        (self.rate() < 0.0).then(|| -self.p0 * self.p0 / self.rate())
    }

    pub fn perimeter_at(&self, t: f64) -> PerimeterValue {
        let p2 = self.p0 * self.p0 + self.rate() * t;
        match self.coalescence_time() {
            Some(t_star) if p2 <= 0.0 => PerimeterValue::Coalesced { t_star },
            _ => PerimeterValue::Value(p2.max(0.0).sqrt()),
        }
    }
}

pub fn similar_solution(
    x: &TrilinearPoint,
    s: &VortexStrengths,
    gamma: i8,
    p0: f64,
    t: f64,
) -> Result<PerimeterValue> {
    Ok(SimilarSolutionParams::new(x, s, gamma, p0)?.perimeter_at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::formulations::rhs_trilinear;
    use crate::geometry::curve_point;
    use crate::vortex::parabolic_strengths;

    fn k21() -> VortexStrengths {
        parabolic_strengths(2.0, 1.0).unwrap()
    }

    #[test]
    fn centroid_is_stationary() {
        let s = k21();
        let e = TrilinearPoint::centroid();
        let prm = SimilarSolutionParams::new(&e, &s, 1, 1.0).unwrap();
        assert_eq!(prm.d0, 0.0);
        assert_eq!(prm.growth(), Growth::Stationary);
        assert_eq!(prm.perimeter_at(100.0), PerimeterValue::Value(1.0));
    }

    #[test]
    fn rate_matches_perimeter_equation() {
        let s = k21();
        for x1 in [0.12, 0.2, 0.3, 0.36, 0.42, 0.48] {
            let x = curve_point(x1, &s).unwrap();
            let r = rhs_trilinear(&x, &s).unwrap();
            let prm = SimilarSolutionParams::new(&x, &s, 1, 1.0).unwrap();
            // d(p²)/dt = 2 p² (dp/dt)/p
            assert!((prm.rate() - 2.0 * r.pdot_over_p).abs() < 1e-12 * prm.rate().abs().max(1.0));
        }
    }

    #[test]
    fn branch_verdicts() {
        let s = k21();
        let left = curve_point(0.4, &s).unwrap();
        assert!(left.x1() > left.x2());
        assert_eq!(SimilarSolutionParams::new(&left, &s, 1, 1.0).unwrap().growth(), Growth::Expanding);
        assert_eq!(SimilarSolutionParams::new(&left, &s, -1, 1.0).unwrap().growth(), Growth::Contracting);
        let right = curve_point(0.2, &s).unwrap();
        assert!(right.x2() > right.x1());
        assert_eq!(SimilarSolutionParams::new(&right, &s, 1, 1.0).unwrap().growth(), Growth::Contracting);
    }

    #[test]
    fn sample_rate_at_x1_0_4() {
        let prm = SimilarSolutionParams::new(&curve_point(0.4, &k21()).unwrap(), &k21(), 1, 1.0).unwrap();
        assert!((prm.rate() - 7.7104).abs() < 1e-3);
    }

    #[test]
    fn coalescence_signal() {
        let s = k21();
        let x = curve_point(0.4, &s).unwrap();
        let prm = SimilarSolutionParams::new(&x, &s, -1, 1.0).unwrap();
        let t_star = prm.coalescence_time().unwrap();
        assert!((t_star * prm.rate() + 1.0).abs() < 1e-15);
        assert_eq!(prm.perimeter_at(2.0 * t_star), PerimeterValue::Coalesced { t_star });
        match prm.perimeter_at(0.5 * t_star) {
            PerimeterValue::Value(p) => assert!((p * p - 0.5).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_off_curve_points() {
        let s = k21();
        let x = TrilinearPoint::new([0.18195, 0.44396, 0.37409], 1);
        assert!(matches!(SimilarSolutionParams::new(&x, &s, 1, 1.0), Err(Error::NotOnCurve { .. })));
        let s = crate::vortex::VortexStrengths::new(1.0, 1.0, 1.0).unwrap();
        assert!(SimilarSolutionParams::new(&TrilinearPoint::centroid(), &s, 1, 1.0).is_err());
    }
}
