//! Cross-check of the three formulations over a common horizon.

use serde::{Deserialize, Serialize};

use super::formulations::{rhs_z_vec, sides_system, trilinear_system};
use super::solver::{Dopri5, SolverOptions};
use super::IntegratorSettings;
use crate::vortex::{configuration_of, VortexState, VortexStrengths};
use crate::{Error, Result};

/// Comparison grid size.
const GRID: usize = 501;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub horizon: f64,
    /// Equal to `horizon` unless one formulation failed first.
    pub horizon_reached: f64,
    pub notice: Option<String>,
    /// Largest `|R_j|` difference between the complex-plane run and the
    /// side-length and trilinear runs.
    pub max_r_discrepancy: f64,
    pub max_x_discrepancy: f64,
    /// Number of orientation changes seen by the complex-plane run.
    pub orientation_flips: usize,
}

/// Samples `f` at `times` until the first failure.
fn run<F, const N: usize>(
    f: F,
    y0: [f64; N],
    times: &[f64],
    opts: SolverOptions,
) -> (Vec<[f64; N]>, Option<Error>)
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut out = vec![y0];
    let t_end = *times.last().unwrap_or(&0.0);
    let mut solver = match Dopri5::new(f, times[0], y0, opts) {
        Ok(s) => s,
        Err(e) => return (out, Some(e)),
    };
    let mut next = 1;
    while next < times.len() {
        let step = match solver.step(t_end) {
            Ok(st) => st,
            Err(e) => return (out, Some(e)),
        };
        while next < times.len() && times[next] <= step.t1() {
            out.push(if times[next] == step.t1() { step.y1 } else { step.eval(times[next]) });
            next += 1;
        }
    }
    (out, None)
}

/// Integrates the complex-plane, side-length and trilinear systems from the
/// same start and reports their largest disagreement on a uniform grid.
pub fn oracle_compare(
    state0: &VortexState,
    s: &VortexStrengths,
    settings: &IntegratorSettings,
    horizon: f64,
) -> Result<OracleReport> {
    settings.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::OutOfRange(format!("horizon = {horizon} is not positive")));
    }
    let cfg = configuration_of(state0)?;
    let t0 = state0.t;
    let times: Vec<f64> = (0..GRID)
        .map(|i| t0 + horizon * i as f64 / (GRID - 1) as f64)
        .collect();
    let opts = SolverOptions {
        rel_tol: settings.rel_tol,
        abs_tol: settings.abs_tol,
        max_step: settings.max_step,
    };

    let sigma0 = cfg.signed_area();
    let p0 = cfg.p;
    let (zs, ez) = run(|_, y: &[f64; 6]| rhs_z_vec(y, s), state0.to_vector(), &times, opts);
    let (rs, er) = run(
        |_, y: &[f64; 4]| sides_system(y, s),
        [cfg.r[0], cfg.r[1], cfg.r[2], sigma0],
        &times,
        opts,
    );
    let (xs, ex) = run(
        |_, y: &[f64; 5]| trilinear_system(y, s),
        [cfg.r[0] / p0, cfg.r[1] / p0, cfg.r[2] / p0, p0, sigma0 / (p0 * p0)],
        &times,
        opts,
    );

    let n = zs.len().min(rs.len()).min(xs.len());
    let notice = [("complex-plane", ez), ("side-length", er), ("trilinear", ex)]
        .into_iter()
        .find_map(|(name, e)| e.map(|e| format!("{name} run stopped early: {e}")));

    let mut max_r: f64 = 0.0;
    let mut max_x: f64 = 0.0;
    let mut flips = 0;
    let mut last_sign = 0.0_f64;
    for i in 0..n {
        let st = VortexState::from_vector(times[i], &zs[i]);
        let rz = st.sides();
        let pz: f64 = rz.iter().sum();
        let a = st.twice_signed_area();
        if last_sign != 0.0 && a != 0.0 && a.signum() != last_sign {
            flips += 1;
        }
        if a != 0.0 {
            last_sign = a.signum();
        }
        let tri = &xs[i];
        for j in 0..3 {
            max_r = max_r
                .max((rz[j] - rs[i][j]).abs())
                .max((rz[j] - tri[j] * tri[3]).abs());
            let xz = rz[j] / pz;
            let pr: f64 = rs[i][..3].iter().sum();
            max_x = max_x.max((xz - rs[i][j] / pr).abs()).max((xz - tri[j]).abs());
        }
    }

    Ok(OracleReport {
        horizon,
        horizon_reached: times[n - 1] - t0,
        notice,
        max_r_discrepancy: max_r,
        max_x_discrepancy: max_x,
        orientation_flips: flips,
    })
}
