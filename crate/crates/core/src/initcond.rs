//! Initial positions from a prescribed triangle, and starts at a prescribed
//! offset from the critical curve.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{
    cal_y_of, ibar_of_sides, locate_on_contracting_branch, locate_on_expanding_branch, strip_bounds, TrilinearPoint,
};
use crate::vortex::{configuration_of, Configuration, Invariants, VortexState, VortexStrengths};
use crate::{Error, Result};

/// A unit-perimeter triangle with orientation and strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    pub r: [f64; 3],
    pub gamma: i8,
    pub k: VortexStrengths,
}

impl InitialSpec {
    pub fn new(r: [f64; 3], gamma: i8, k: VortexStrengths) -> Result<Self> {
        if gamma != 1 && gamma != -1 {
            return Err(Error::InvalidConfiguration(format!(
                "orientation must be +1 or -1, got {gamma}"
            )));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfiguration(format!(
                "sides must sum to 1, got {sum}"
            )));
        }
        Configuration::from_sides(r, gamma)?;
        Ok(Self { r, gamma, k })
    }

    /// The unit-perimeter triangle of a trilinear point.
    pub fn from_point(x: &TrilinearPoint, k: VortexStrengths) -> Result<Self> {
        let sum: f64 = x.x.iter().sum();
        Self::new(x.x.map(|v| v / sum), x.gamma, k)
    }
}

/// Places the vortices so that `z1` sits directly above `z2` at distance
/// `R3`, `z3` lies to the right, and `Σ k_j z_j = 0`. Orientation `-1` is
/// obtained by reflection in the real axis.
pub fn positions_from_config(spec: &InitialSpec) -> Result<VortexState> {
    let VortexStrengths { k1, k2, k3 } = spec.k;
    let total = k1 + k2 + k3;
    if total == 0.0 || k3 == 0.0 {
        return Err(Error::Unsupported(
            "the construction needs k1 + k2 + k3 != 0 and k3 != 0".into(),
        ));
    }
    let [r1, r2, r3] = spec.r;
    let im2 = (-k3 * (r1 * r1 - r2 * r2) - r3 * r3 * (2.0 * k1 + k3)) / (2.0 * r3 * total);
    let im1 = im2 + r3;
    let im3 = -(k1 * im1 + k2 * im2) / k3;
    let radicand = r2 * r2 - (im3 - im1).powi(2);
    if !(radicand > 0.0) {
        return Err(Error::InconsistentConfiguration(format!(
            "no real placement of z3 for sides {:?} (radicand {radicand:e})",
            spec.r
        )));
    }
    let d = radicand.sqrt();
    let re1 = -k3 * d / total;
    let state = VortexState::new(
        0.0,
        [
            Complex64::new(re1, im1),
            Complex64::new(re1, im2),
            Complex64::new(re1 + d, im3),
        ],
    );
    let state = if spec.gamma < 0 { state.conjugate() } else { state };

    let cfg = configuration_of(&state)?;
    let worst = cfg
        .r
        .iter()
        .zip(spec.r)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if worst > 1e-12 || cfg.gamma != spec.gamma {
        return Err(Error::InconsistentConfiguration(format!(
            "placement reproduces sides {:?} (wanted {:?}), orientation {}",
            cfg.r, spec.r, cfg.gamma
        )));
    }
    let impulse = Invariants::linear_impulse(&state, &spec.k).norm();
    if impulse > 1e-14 {
        return Err(Error::InconsistentConfiguration(format!(
            "Σ k_j z_j = {impulse:e} after placement"
        )));
    }
    Ok(state)
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;

/// The point with `Ī = ibar_target` and `𝒴 = caly_target`, found by damped
/// Newton iteration in `(x1, x3)` from the point of the branch that contracts
/// under `gamma` with the same `Ī`: `EQ5` for `+1`, `Q4E` (traversed as
/// `E*Q4`) for `-1`. Clockwise targets need `Ī4 <= Ī < 1`.
pub fn point_at_offset(
    ibar_target: f64,
    caly_target: f64,
    gamma: i8,
    s: &VortexStrengths,
) -> Result<TrilinearPoint> {
    if gamma != 1 && gamma != -1 {
        return Err(Error::UndefinedDirection);
    }
    let strip = strip_bounds(s)?;
    if !strip.contains(ibar_target) {
        return Err(Error::OutOfRange(format!(
            "Ī = {ibar_target} lies outside ({}, 1)",
            strip.ibar_upper
        )));
    }
    let seed = if gamma == 1 {
        locate_on_contracting_branch(ibar_target, s)?
    } else {
        locate_on_expanding_branch(ibar_target, s)?
    };
    let VortexStrengths { k1, k2, k3 } = *s;
    let ln_target = ibar_target.ln();

    let residual = |x1: f64, x3: f64| -> Option<[f64; 2]> {
        let x2 = 1.0 - x1 - x3;
        if !(x1 > 0.0 && x2 > 0.0 && x3 > 0.0) {
            return None;
        }
        let ln_ibar = k2 * (x1 / x3).ln() + k1 * (x2 / x3).ln();
        Some([ln_ibar - ln_target, cal_y_of([x1, x2, x3], s) - caly_target])
    };
    let norm = |r: &[f64; 2]| r[0].hypot(r[1]);

    let (mut x1, mut x3) = (seed.x1(), seed.x3());
    let mut r = residual(x1, x3).ok_or(Error::DivergentInvariant)?;
    for _ in 0..NEWTON_MAX_ITER {
        let x = [x1, 1.0 - x1 - x3, x3];
        if done(&x, ibar_target, caly_target, s) {
            return Ok(TrilinearPoint::new(x, gamma));
        }
        let x2 = x[1];
        let j11 = k2 / x1 - k1 / x2;
        let j12 = -(k1 + k2) / x3 - k1 / x2;
        let j21 = 2.0 * k3 * (k2 * x1 - k1 * x2);
        let j22 = 2.0 * k1 * (k2 * x3 - k3 * x2);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let d1 = (r[0] * j22 - r[1] * j12) / det;
        let d3 = (j11 * r[1] - j21 * r[0]) / det;
        let mut lambda = 1.0;
        let current = norm(&r);
        loop {
            let (t1, t3) = (x1 - lambda * d1, x3 - lambda * d3);
            match residual(t1, t3) {
                Some(rt) if norm(&rt) <= current || lambda < 1e-10 => {
                    x1 = t1;
                    x3 = t3;
                    r = rt;
                    break;
                }
                _ if lambda < 1e-10 => break,
                _ => lambda *= 0.5,
            }
        }
    }
    let x = [x1, 1.0 - x1 - x3, x3];
    if done(&x, ibar_target, caly_target, s) {
        return Ok(TrilinearPoint::new(x, gamma));
    }
    Err(Error::NoSolution {
        iterations: NEWTON_MAX_ITER,
        residual: norm(&r),
    })
}

fn done(x: &[f64; 3], ibar_target: f64, caly_target: f64, s: &VortexStrengths) -> bool {
    let Ok(ib) = ibar_of_sides(*x, s) else {
        return false;
    };
    (ib - ibar_target).abs() < NEWTON_TOL && (cal_y_of(*x, s) - caly_target).abs() < NEWTON_TOL
}

/// One of the four tabulated starts for `k = (2, 1, -2/3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TablePreset {
    pub name: &'static str,
    pub r: [f64; 3],
    pub caly: f64,
    pub ibar: f64,
}

pub const TABLE1: [TablePreset; 4] = [
    TablePreset { name: "r-", r: [0.18195, 0.44396, 0.37409], caly: -0.00498, ibar: 0.68503 },
    TablePreset { name: "r+", r: [0.19108, 0.43424, 0.37468], caly: 0.00501, ibar: 0.68500 },
    TablePreset { name: "u-", r: [0.10442, 0.49225, 0.40333], caly: -0.00500, ibar: 0.38563 },
    TablePreset { name: "u+", r: [0.10839, 0.48643, 0.40518], caly: 0.00502, ibar: 0.38555 },
];

pub fn preset(name: &str) -> Option<&'static TablePreset> {
    TABLE1.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cal_y;
    use crate::vortex::parabolic_strengths;

    fn k21() -> VortexStrengths {
        parabolic_strengths(2.0, 1.0).unwrap()
    }

    fn spec(r: [f64; 3], gamma: i8) -> InitialSpec {
        let sum: f64 = r.iter().sum();
        InitialSpec::new(r.map(|v| v / sum), gamma, k21()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(InitialSpec::new([0.2, 0.3, 0.4], 1, k21()).is_err());
        assert!(InitialSpec::new([0.1, 0.2, 0.7], 1, k21()).is_err());
        assert!(InitialSpec::new([0.3, 0.3, 0.4], 0, k21()).is_err());
    }

    #[test]
    fn r_minus_placement() {
        let sp = spec(TABLE1[0].r, 1);
        let st = positions_from_config(&sp).unwrap();
        let [z1, z2, z3] = st.z;
        assert_eq!(z1.re, z2.re);
        assert!((z1.im - z2.im - sp.r[2]).abs() < 1e-15);
        assert!(z3.re > z1.re);
        assert!((z2.im + 0.32983).abs() < 1e-5);
        let s = k21();
        assert!(((s.k1 + s.k2) * z1.re + s.k3 * z3.re).abs() < 1e-15);
        let cfg = configuration_of(&st).unwrap();
        assert!((cfg.p - 1.0).abs() < 1e-12);
        assert_eq!(cfg.gamma, 1);
    }

    #[test]
    fn reflected_placement() {
        let sp = spec(TABLE1[3].r, -1);
        let st = positions_from_config(&sp).unwrap();
        assert_eq!(configuration_of(&st).unwrap().gamma, -1);
    }

    #[test]
    fn equilateral_placement() {
        let st = positions_from_config(&spec([1.0; 3], 1)).unwrap();
        for r in st.sides() {
            assert!((r - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn offset_reconstructs_table_rows() {
        let s = k21();
        let x = point_at_offset(0.685, -0.005, 1, &s).unwrap();
        for (a, b) in x.x.iter().zip(TABLE1[0].r) {
            assert!((a - b).abs() < 2e-4, "{:?}", x.x);
        }
        let x = point_at_offset(0.3856, 0.005, 1, &s).unwrap();
        for (a, b) in x.x.iter().zip(TABLE1[3].r) {
            assert!((a - b).abs() < 2e-4, "{:?}", x.x);
        }
    }

    #[test]
    fn zero_offset_lands_on_curve() {
        let s = k21();
        let x = point_at_offset(0.685, 0.0, 1, &s).unwrap();
        assert!(cal_y(&x, &s).abs() < 1e-12);
        let seed = locate_on_contracting_branch(0.685, &s).unwrap();
        assert!(x.max_distance(&seed) < 1e-10);
    }

    #[test]
    fn clockwise_offsets_seed_on_the_image_branch() {
        let s = k21();
        let x = point_at_offset(0.7, 0.0, -1, &s).unwrap();
        assert_eq!(x.gamma, -1);
        assert!(x.x1() > x.x2());
        assert!(cal_y(&x, &s).abs() < 1e-12);
        assert!(matches!(point_at_offset(0.4, 0.005, -1, &s), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn offset_outside_strip() {
        let s = k21();
        assert!(matches!(point_at_offset(1.2, 0.005, 1, &s), Err(Error::OutOfRange(_))));
        assert!(matches!(point_at_offset(0.2, 0.005, 1, &s), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn presets_lookup() {
        assert_eq!(preset("u-").unwrap().r[0], 0.10442);
        assert!(preset("x").is_none());
    }
}
