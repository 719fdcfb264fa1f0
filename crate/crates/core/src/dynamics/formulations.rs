//! Right-hand sides of the three equivalent formulations of the motion.
//!
//! The complex-plane equations are primary. The side-length and trilinear
//! forms are restatements used as cross-checks; their augmented systems carry
//! the signed area `γ|A|` as an extra state so that they pass smoothly through
//! collinear configurations, where `γ` flips.

use num_complex::Complex64;

use crate::geometry::{cal_y_of, TrilinearPoint};
use crate::vortex::{heron_area, Configuration, VortexState, VortexStrengths};
use crate::{Error, Result};

/// `dz_j/dt = -i Σ_{m≠j} k_m / (conj z_m - conj z_j)`.
pub fn rhs_z(state: &VortexState, s: &VortexStrengths) -> Result<[Complex64; 3]> {
    let k = s.as_array();
    let z = state.z;
    let mut v = [Complex64::new(0.0, 0.0); 3];
    for j in 0..3 {
        for m in 0..3 {
            if m == j {
                continue;
            }
            let d = (z[m] - z[j]).conj();
            if d.norm_sqr() == 0.0 || !d.norm_sqr().is_finite() {
                return Err(Error::Collision {
                    min_side: d.norm(),
                    perimeter: state.sides().iter().sum(),
                });
            }
            v[j] += -Complex64::i() * k[m] / d;
        }
    }
    Ok(v)
}

pub(crate) fn rhs_z_vec(y: &[f64; 6], s: &VortexStrengths) -> Result<[f64; 6]> {
    let v = rhs_z(&VortexState::from_vector(0.0, y), s)?;
    Ok([v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im])
}

/// `Δ_j`: the differences of squared sides multiplying `dR_j/dt`.
fn side_differences(r: [f64; 3]) -> [f64; 3] {
    let q = r.map(|v| v * v);
    [q[2] - q[1], q[0] - q[2], q[1] - q[0]]
}

/// `∂|A|²/∂R_j` for Heron's area.
fn area_sq_gradient(r: [f64; 3]) -> [f64; 3] {
    let q = r.map(|v| v * v);
    [
        0.25 * r[0] * (q[1] + q[2] - q[0]),
        0.25 * r[1] * (q[2] + q[0] - q[1]),
        0.25 * r[2] * (q[0] + q[1] - q[2]),
    ]
}

/// Side rates `dR_j/dt = 2γ|A| k_j R_j Δ_j / (R1² R2² R3²)`.
pub fn rhs_r(config: &Configuration, s: &VortexStrengths) -> Result<[f64; 3]> {
    if config.gamma == 0 || !(config.area > 0.0) {
        return Err(Error::UndefinedDirection);
    }
    let w = side_weights(config.r, s);
    let sigma = config.signed_area();
    Ok(w.map(|w| sigma * w))
}

/// `dR_j/dt / (γ|A|)`.
fn side_weights(r: [f64; 3], s: &VortexStrengths) -> [f64; 3] {
    let k = s.as_array();
    let d = side_differences(r);
    let denom = (r[0] * r[1] * r[2]).powi(2);
    std::array::from_fn(|j| 2.0 * k[j] * r[j] * d[j] / denom)
}

/// `[R1, R2, R3, γ|A|]` evolved together.
pub(crate) fn sides_system(y: &[f64; 4], s: &VortexStrengths) -> Result<[f64; 4]> {
    let r = [y[0], y[1], y[2]];
    if r.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateConfiguration("a side vanished".into()));
    }
    let w = side_weights(r, s);
    let g = area_sq_gradient(r);
    let sigma = y[3];
    Ok([
        sigma * w[0],
        sigma * w[1],
        sigma * w[2],
        0.5 * (g[0] * w[0] + g[1] * w[1] + g[2] * w[2]),
    ])
}

/// Trilinear rates evaluated at unit perimeter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilinearRates {
    pub xdot: [f64; 3],
    pub pdot_over_p: f64,
}

impl TrilinearRates {
    /// The rates for a triangle of perimeter `p`; time scales with `p²`.
    pub fn at_perimeter(&self, p: f64) -> Self {
        let f = 1.0 / (p * p);
        Self {
            xdot: self.xdot.map(|v| v * f),
            pdot_over_p: self.pdot_over_p * f,
        }
    }
}

fn f_factors(x: [f64; 3], s: &VortexStrengths) -> [f64; 3] {
    let [x1, x2, x3] = x;
    let VortexStrengths { k1, k2, k3 } = *s;
    [
        x1 * (x3 / k2 - x2 / k3),
        x2 * (x1 / k3 - x3 / k1),
        x3 * (x2 / k1 - x1 / k2),
    ]
}

fn perimeter_factor(x: [f64; 3], s: &VortexStrengths) -> f64 {
    let k = s.as_array();
    let d = side_differences(x);
    (0..3).map(|j| k[j] * x[j] * d[j]).sum()
}

/// `dx_j/dt = γ F_j ℋ 𝒴` and `dp/dt / p`, at `p = 1`, parabolic strengths.
pub fn rhs_trilinear(x: &TrilinearPoint, s: &VortexStrengths) -> Result<TrilinearRates> {
    if !s.is_parabolic() {
        return Err(Error::Unsupported(
            "the reduced trilinear flow needs K = 0".into(),
        ));
    }
    if x.gamma == 0 || x.x.iter().any(|v| !(*v > 0.0 && *v < 0.5)) {
        return Err(Error::UndefinedDirection);
    }
    let area = heron_area(x.x);
    if !(area > 0.0) {
        return Err(Error::UndefinedDirection);
    }
    let g = f64::from(x.gamma) * 2.0 * area / (x.x[0] * x.x[1] * x.x[2]).powi(2);
    let caly = cal_y_of(x.x, s);
    let f = f_factors(x.x, s);
    Ok(TrilinearRates {
        xdot: f.map(|f| g * f * caly),
        pdot_over_p: g * perimeter_factor(x.x, s),
    })
}

/// `[x1, x2, x3, p, γ|A₁|]` evolved together, `|A₁|` the unit-perimeter area.
pub(crate) fn trilinear_system(y: &[f64; 5], s: &VortexStrengths) -> Result<[f64; 5]> {
    let x = [y[0], y[1], y[2]];
    let p = y[3];
    if x.iter().any(|v| !(*v > 0.0)) || !(p > 0.0) {
        return Err(Error::DegenerateConfiguration("trilinear state left Δ_Q".into()));
    }
    // h = ℋ / (γ|A₁|)
    let h = 2.0 / (p * p * (x[0] * x[1] * x[2]).powi(2));
    let pf = perimeter_factor(x, s);
    let w: [f64; 3] = if s.is_parabolic() {
        let caly = cal_y_of(x, s);
        f_factors(x, s).map(|f| h * f * caly)
    } else {
        let k = s.as_array();
        let d = side_differences(x);
        std::array::from_fn(|j| h * x[j] * (k[j] * d[j] - pf))
    };
    let sigma = y[4];
    let g = area_sq_gradient(x);
    Ok([
        sigma * w[0],
        sigma * w[1],
        sigma * w[2],
        sigma * h * pf * p,
        0.5 * (g[0] * w[0] + g[1] * w[1] + g[2] * w[2]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vortex::{configuration_of, parabolic_strengths};

    fn equilateral() -> VortexState {
        let c = 1.0 / (3.0 * 3f64.sqrt());
        VortexState::new(
            0.0,
            [0.0_f64, 2.0, 4.0].map(|m| Complex64::from_polar(c, m * std::f64::consts::PI / 3.0)),
        )
    }

    #[test]
    fn equal_strength_equilateral_rotates_rigidly() {
        let s = VortexStrengths::new(1.0, 1.0, 1.0).unwrap();
        let v = rhs_z(&equilateral(), &s).unwrap();
        let speed = v[0].norm();
        assert!(speed > 0.0);
        for vj in v {
            assert!((vj.norm() - speed).abs() < 1e-13);
        }
    }

    #[test]
    fn two_vortex_limit() {
        let s = VortexStrengths::new(1.0, 1.0, 0.0).unwrap();
        let st = VortexState::new(
            0.0,
            [Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.4), Complex64::new(5.0, 5.0)],
        );
        let v = rhs_z(&st, &s).unwrap();
        let d = (st.z[0] - st.z[1]).norm();
        assert!((v[0].norm() * d - s.k2).abs() < 1e-14);
        // velocity perpendicular to the separation
        assert!(((st.z[1] - st.z[0]).conj() * v[0]).re.abs() < 1e-14);
    }

    #[test]
    fn collision_is_an_error() {
        let s = parabolic_strengths(2.0, 1.0).unwrap();
        let st = VortexState::new(0.0, [Complex64::new(0.0, 0.0); 3]);
        assert!(matches!(rhs_z(&st, &s), Err(Error::Collision { .. })));
    }

    #[test]
    fn equilateral_sides_stationary() {
        let s = parabolic_strengths(2.0, 1.0).unwrap();
        let cfg = configuration_of(&equilateral()).unwrap();
        for r in rhs_r(&cfg, &s).unwrap() {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_sides_have_no_direction() {
        let s = parabolic_strengths(2.0, 1.0).unwrap();
        let cfg = Configuration::from_sides([0.25, 0.25, 0.5], 0).unwrap();
        assert_eq!(rhs_r(&cfg, &s), Err(Error::UndefinedDirection));
    }

    #[test]
    fn invariant_a_is_stationary() {
        for (k, r) in [
            (parabolic_strengths(2.0, 1.0).unwrap(), [0.3, 0.4, 0.35]),
            (VortexStrengths::new(1.5, 1.0, 0.7).unwrap(), [0.2, 0.45, 0.35]),
        ] {
            let cfg = Configuration::from_sides(r, -1).unwrap();
            let rd = rhs_r(&cfg, &k).unwrap();
            let da: f64 = (0..3).map(|j| 2.0 * r[j] * rd[j] / k.as_array()[j]).sum();
            assert!(da.abs() < 1e-12);
        }
    }

    #[test]
    fn trilinear_components_sum_to_zero() {
        let s = parabolic_strengths(2.0, 1.0).unwrap();
        let x = TrilinearPoint::new([0.2, 0.42, 0.38], 1);
        let r = rhs_trilinear(&x, &s).unwrap();
        assert!(r.xdot.iter().sum::<f64>().abs() < 1e-12);
        let flipped = rhs_trilinear(&x.image(), &s).unwrap();
        for j in 0..3 {
            assert_eq!(flipped.xdot[j], -r.xdot[j]);
        }
        assert_eq!(flipped.pdot_over_p, -r.pdot_over_p);
    }

    #[test]
    fn trilinear_forms_agree_in_parabolic_case() {
        let s = parabolic_strengths(2.0, 1.0).unwrap();
        let x = [0.2, 0.42, 0.38];
        let sigma = heron_area(x);
        let reduced = trilinear_system(&[x[0], x[1], x[2], 1.0, sigma], &s).unwrap();
        // the same right-hand side from the un-reduced per-side equations
        let k = s.as_array();
        let d = side_differences(x);
        let h = 2.0 * sigma / (x[0] * x[1] * x[2]).powi(2);
        let pf = perimeter_factor(x, &s);
        for j in 0..3 {
            let general = x[j] * h * (k[j] * d[j] - pf);
            assert!((reduced[j] - general).abs() < 1e-12, "{j}");
        }
    }

    #[test]
    fn sign_of_beta_rate() {
        let s = parabolic_strengths(2.0, 1.0).unwrap();
        for (dx1, dx3) in [(0.01, 0.02), (-0.02, 0.01), (0.015, -0.01), (-0.01, -0.02)] {
            for gamma in [1i8, -1] {
                let x = [1.0 / 3.0 + dx1, 1.0 / 3.0 - dx1 - dx3, 1.0 / 3.0 + dx3];
                let pt = TrilinearPoint::new(x, gamma);
                let r = rhs_trilinear(&pt, &s).unwrap();
                let expect = f64::from(gamma) * cal_y_of(x, &s) * (s.k2 * x[1] - s.k1 * x[0]);
                assert_eq!(r.xdot[2].signum(), expect.signum());
            }
        }
    }
}
