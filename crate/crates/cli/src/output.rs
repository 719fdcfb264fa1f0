use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;
use trivortex::classify::{ConvergenceReport, TypePrediction};
use trivortex::dynamics::{InvariantDrift, Termination, TrajectorySample};
use trivortex::geometry::{to_alpha_beta, TrilinearPoint};
use trivortex::initcond::InitialSpec;
use trivortex::VortexStrengths;

pub const TRAJECTORY_HEADER: &str =
    "t,re_z1,im_z1,re_z2,im_z2,re_z3,im_z3,R1,R2,R3,p,x1,x2,x3,alpha,beta,gamma,calY,ibar";

pub const CURVE_HEADER: &str = "x1,x2,x3,alpha,beta";

/// 17 significant digits.
fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn row(values: &[f64], tail: Option<(usize, i8)>) -> String {
    let mut line = String::with_capacity(24 * values.len());
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        if let Some((at, g)) = tail {
            if i == at {
                let _ = write!(line, "{g}");
                continue;
            }
        }
        num(&mut line, *v);
    }
    line.push('\n');
    line
}

pub fn trajectory_row(s: &TrajectorySample) -> String {
    let [z1, z2, z3] = s.state.z;
    let ab = to_alpha_beta(&s.x);
    let values = [
        s.t,
        z1.re,
        z1.im,
        z2.re,
        z2.im,
        z3.re,
        z3.im,
        s.config.r[0],
        s.config.r[1],
        s.config.r[2],
        s.p,
        s.x.x[0],
        s.x.x[1],
        s.x.x[2],
        ab.alpha,
        ab.beta,
        0.0,
        s.caly,
        s.ibar,
    ];
    row(&values, Some((16, s.x.gamma)))
}

pub fn write_trajectory(w: &mut impl Write, samples: &[TrajectorySample]) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in samples {
        w.write_all(trajectory_row(s).as_bytes())?;
    }
    w.flush()
}

pub fn write_curve(w: &mut impl Write, points: &[TrilinearPoint]) -> io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for p in points {
        let ab = to_alpha_beta(p);
        w.write_all(row(&[p.x[0], p.x[1], p.x[2], ab.alpha, ab.beta], None).as_bytes())?;
    }
    w.flush()
}

#[derive(Debug, Serialize)]
pub struct StrengthsOut {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

#[derive(Debug, Serialize)]
pub struct InitialOut {
    #[serde(rename = "R")]
    pub r: [f64; 3],
    pub gamma: i8,
}

#[derive(Debug, Serialize)]
pub struct PredictionOut {
    #[serde(rename = "type")]
    pub kind: String,
    pub basis: trivortex::classify::Basis,
    pub branch_start: String,
    pub caly: f64,
    pub ibar: f64,
}

#[derive(Debug, Serialize)]
pub struct ReportOut {
    pub converged: bool,
    pub t_conv: f64,
    pub final_point: [f64; 3],
    pub final_gamma: i8,
    pub final_branch: String,
    pub crossing_edges: Vec<String>,
    pub crossing_times: Vec<f64>,
    pub caly_extrema_count: usize,
    pub observed_type: Option<String>,
    pub termination: String,
    pub t_end: f64,
}

#[derive(Debug, Serialize)]
pub struct DriftOut {
    pub ibar_rel: f64,
    pub kirchhoff_abs: f64,
}

/// Flat run summary; no object nests deeper than one level.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub strengths: StrengthsOut,
    pub initial: InitialOut,
    pub prediction: Option<PredictionOut>,
    pub report: ReportOut,
    pub invariant_drift: DriftOut,
    pub valid: bool,
    pub wall_time_ms: u64,
}

pub fn termination_label(t: &Termination) -> String {
    match t {
        Termination::TimeLimit => "time-limit".into(),
        Termination::TerminalEvent { label } => format!("event:{label}"),
        Termination::Collision { .. } => "collision".into(),
        Termination::StepUnderflow { .. } => "step-underflow".into(),
    }
}

impl RunSummary {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        run_id: String,
        s: &VortexStrengths,
        spec: &InitialSpec,
        prediction: Option<&TypePrediction>,
        report: &ConvergenceReport,
        termination: &Termination,
        t_end: f64,
        drift: &InvariantDrift,
        wall_time_ms: u64,
    ) -> Self {
        let kirchhoff_abs = drift.impulse_abs.max(drift.polar_moment_abs);
        Self {
            run_id,
            strengths: StrengthsOut { k1: s.k1, k2: s.k2, k3: s.k3 },
            initial: InitialOut { r: spec.r, gamma: spec.gamma },
            prediction: prediction.map(|p| PredictionOut {
                kind: p.kind.to_string(),
                basis: p.basis,
                branch_start: p.branch_start.to_string(),
                caly: p.caly,
                ibar: p.ibar,
            }),
            report: ReportOut {
                converged: report.converged,
                t_conv: report.t_conv,
                final_point: report.final_point.x,
                final_gamma: report.final_point.gamma,
                final_branch: report.final_branch.to_string(),
                crossing_edges: report.crossings.iter().map(|c| c.edge.to_string()).collect(),
                crossing_times: report.crossings.iter().map(|c| c.t_cross).collect(),
                caly_extrema_count: report.caly_extrema_count,
                observed_type: report.observed_type.map(|t| t.to_string()),
                termination: termination_label(termination),
                t_end,
            },
            invariant_drift: DriftOut {
                ibar_rel: drift.ibar_rel,
                kirchhoff_abs,
            },
            valid: drift.ibar_rel < 1e-3,
            wall_time_ms,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digits(field: &str) -> usize {
        let mantissa = field.split('e').next().unwrap();
        mantissa.chars().filter(|c| c.is_ascii_digit()).count()
    }

    #[test]
    fn rows_carry_seventeen_digits() {
        let line = row(&[1.0 / 3.0, -2.5, 0.0], None);
        assert!(line.ends_with('\n'));
        for field in line.trim_end().split(',') {
            assert_eq!(digits(field), 17, "{field}");
            let v: f64 = field.parse().unwrap();
            assert!(v.is_finite());
        }
        assert_eq!(line.trim_end().split(',').next().unwrap().parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn orientation_column_is_an_integer() {
        let line = row(&[0.5, 0.0, 0.25], Some((1, -1)));
        assert_eq!(line.split(',').nth(1), Some("-1"));
    }

    #[test]
    fn header_column_count() {
        assert_eq!(TRAJECTORY_HEADER.split(',').count(), 19);
    }
}
