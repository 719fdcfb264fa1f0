use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use trivortex::classify::{
    predict, run_to_convergence, ConvergenceReport, DepartureType, DEFAULT_TOL_CONV,
};
use trivortex::dynamics::{
    oracle_compare, IntegratorSettings, SimilarSolutionParams, Termination, TrajectoryRecord,
};
use trivortex::geometry::{cal_y, critical_points, curve_domain, curve_point, ibar, TrilinearPoint};
use trivortex::initcond::{point_at_offset, positions_from_config, preset, InitialSpec, TABLE1};
use trivortex::vortex::parabolic_strengths;
use trivortex::{Error, VortexState, VortexStrengths};

use crate::args::{CurveArgs, SimulateArgs, StrengthArgs, Table1Args, VerifyArgs};
use crate::output::{write_curve, write_trajectory, RunSummary};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECKS_FAILED: u8 = 1;
pub const EXIT_UNCONVERGED: u8 = 2;
pub const EXIT_COLLISION: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;
pub const EXIT_IO: u8 = 74;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    Io(String, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(Error::InvalidSettings(_)) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Io(..) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{path}: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn strengths(a: &StrengthArgs) -> CliResult<VortexStrengths> {
    Ok(parabolic_strengths(a.k1, a.k2)?)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn io_at(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.map_or("stdout".into(), |p| p.display().to_string()), e)
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("summary types serialize");
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}").and_then(|_| w.flush()).map_err(io_at(path))
        }
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}").map_err(io_at(None))
        }
    }
}

/// The unit-perimeter start chosen by the flags, with a label for the run.
fn start_point(a: &SimulateArgs, s: &VortexStrengths) -> CliResult<(TrilinearPoint, String)> {
    if a.gamma != 1 && a.gamma != -1 {
        return Err(CliError::Usage(format!("--gamma must be 1 or -1, got {}", a.gamma)));
    }
    if let Some(name) = &a.preset {
        let p = preset(name).ok_or_else(|| {
            CliError::Usage(format!("unknown preset {name:?}; expected one of r-, r+, u-, u+"))
        })?;
        return Ok((TrilinearPoint::new(p.r, a.gamma), name.clone()));
    }
    if let Some(r) = &a.sides {
        if r.len() != 3 {
            return Err(CliError::Usage(format!("--R takes three sides, got {}", r.len())));
        }
        let sum: f64 = r.iter().sum();
        if !(sum > 0.0) {
            return Err(CliError::Data(Error::InvalidConfiguration(format!(
                "sides {r:?} have no positive perimeter"
            ))));
        }
        let x = [r[0] / sum, r[1] / sum, r[2] / sum];
        return Ok((TrilinearPoint::new(x, a.gamma), format!("R={},{},{}", r[0], r[1], r[2])));
    }
    if let Some(ib) = a.ibar {
        let x = point_at_offset(ib, a.caly, a.gamma, s)?;
        return Ok((x, format!("ibar={ib},caly={}", a.caly)));
    }
    if let Some(x1) = a.on_curve_x1 {
        let mut x = curve_point(x1, s)?;
        x.gamma = a.gamma;
        return Ok((x, format!("on-curve-x1={x1}")));
    }
    Err(CliError::Usage("no start given".into()))
}

fn settings(t_max: f64, rel_tol: Option<f64>, abs_tol: Option<f64>) -> CliResult<IntegratorSettings> {
    let mut st = IntegratorSettings::default().with_t_max(t_max);
    if let Some(r) = rel_tol {
        st.rel_tol = r;
    }
    if let Some(a) = abs_tol {
        st.abs_tol = a;
    }
    st.validate()?;
    Ok(st)
}

#[derive(Debug, Serialize)]
struct SimilarOut {
    d0: f64,
    s0: f64,
    /// d(p²)/dt
    rate: f64,
    coalescence_time: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SimulateOut {
    #[serde(flatten)]
    summary: RunSummary,
    similar_solution: Option<SimilarOut>,
}

fn exit_code_for(record: &TrajectoryRecord, report: &ConvergenceReport) -> u8 {
    match record.termination {
        Termination::Collision { .. } => EXIT_COLLISION,
        _ if report.converged => EXIT_OK,
        _ => EXIT_UNCONVERGED,
    }
}

pub fn simulate(a: &SimulateArgs) -> CliResult<u8> {
    let clock = Instant::now();
    let s = strengths(&a.strengths)?;
    let st = settings(a.t_max, a.rel_tol, a.abs_tol)?;
    if !(a.tol_conv > 0.0) {
        return Err(CliError::Usage(format!("--tol-conv must be positive, got {}", a.tol_conv)));
    }
    let (x0, run_id) = start_point(a, &s)?;
    let spec = InitialSpec::from_point(&x0, s)?;
    let state0 = positions_from_config(&spec)?;
    let x0 = TrilinearPoint::new(spec.r, spec.gamma);
    let prediction = match predict(&x0, &s) {
        Ok(p) => Some(p),
        Err(trivortex::Error::OutOfRange(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let similar = SimilarSolutionParams::new(&x0, &s, spec.gamma, 1.0).ok().map(|p| SimilarOut {
        d0: p.d0,
        s0: p.s0,
        rate: p.rate(),
        coalescence_time: p.coalescence_time(),
    });

    let (record, report) = run_to_convergence(&state0, &s, &st, a.tol_conv)?;
    if let Some(path) = &a.out {
        let rows = match a.samples {
            Some(n) => record.resample(n)?,
            None => record.samples.clone(),
        };
        let mut w = create(path)?;
        write_trajectory(&mut w, &rows).map_err(io_at(Some(path)))?;
    }
    let drift = record.drift()?;
    let summary = RunSummary::new(
        run_id,
        &s,
        &spec,
        prediction.as_ref(),
        &report,
        &record.termination,
        record.last().t,
        &drift,
        clock.elapsed().as_millis() as u64,
    );
    write_json(a.summary.as_deref(), &SimulateOut { summary, similar_solution: similar })?;
    Ok(exit_code_for(&record, &report))
}

pub fn curve(a: &CurveArgs) -> CliResult<u8> {
    let s = strengths(&a.strengths)?;
    if a.samples < 2 {
        return Err(CliError::Usage(format!("--samples must be at least 2, got {}", a.samples)));
    }
    let (lo, hi) = curve_domain(&s)?;
    let n = a.samples;
    let points = (0..n)
        .map(|i| {
            let x1 = if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            curve_point(x1, &s)
        })
        .collect::<Result<Vec<_>, _>>()?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            write_curve(&mut w, &points).map_err(io_at(Some(path)))?;
        }
        None => write_curve(&mut io::stdout().lock(), &points).map_err(io_at(None))?,
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct PointsOut {
    E: [f64; 3],
    Q4: [f64; 3],
    Q5: [f64; 3],
    Q6: [f64; 3],
    S4: [f64; 3],
    beta4: f64,
    beta5: f64,
    I4: f64,
    I5: f64,
    I6: f64,
    nu_roots: [f64; 3],
}

pub fn points(a: &StrengthArgs) -> CliResult<u8> {
    let s = strengths(a)?;
    let cp = critical_points(&s)?;
    write_json(
        None,
        &PointsOut {
            E: cp.e.x,
            Q4: cp.q4.x,
            Q5: cp.q5.x,
            Q6: cp.q6.x,
            S4: cp.s4.x,
            beta4: cp.beta4,
            beta5: cp.beta5,
            I4: cp.i4,
            I5: cp.i5,
            I6: cp.i6,
            nu_roots: cp.nu_roots,
        },
    )?;
    Ok(EXIT_OK)
}

const TABLE_TYPES: [DepartureType; 4] = [
    DepartureType::I,
    DepartureType::II,
    DepartureType::I,
    DepartureType::III,
];

fn preset_start(r: [f64; 3], s: VortexStrengths) -> Result<VortexState, Error> {
    positions_from_config(&InitialSpec::new(r, 1, s)?)
}

pub fn table1(a: &Table1Args) -> CliResult<u8> {
    let s = parabolic_strengths(2.0, 1.0)?;
    let st = settings(a.t_max, None, None)?;
    let runs: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = TABLE1
            .iter()
            .map(|row| {
                scope.spawn(move || {
                    let state = preset_start(row.r, s)?;
                    run_to_convergence(&state, &s, &st, DEFAULT_TOL_CONV).map(|(_, rep)| rep)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("preset run panicked")).collect()
    });

    let mut out = io::stdout().lock();
    let mut all = true;
    writeln!(out, "case   calY(0) computed / table     Ibar(0) computed / table    type observed / table").map_err(io_at(None))?;
    for ((row, want), run) in TABLE1.iter().zip(TABLE_TYPES).zip(runs) {
        let x = TrilinearPoint::new(row.r, 1);
        let caly = cal_y(&x, &s);
        let ib = ibar(&x, &s)?;
        let report = run?;
        let observed = report.observed_type;
        let ok = (caly - row.caly).abs() <= 1e-4 && (ib - row.ibar).abs() <= 1e-4 && observed == Some(want);
        all &= ok;
        writeln!(
            out,
            "{:<4} {:>10.5} / {:>8.5}      {:>8.5} / {:>8.5}      {:>5} / {:<5} {}",
            row.name,
            caly,
            row.caly,
            ib,
            row.ibar,
            observed.map_or("-".into(), |t| t.to_string()),
            want,
            if ok { "PASS" } else { "FAIL" }
        )
        .map_err(io_at(None))?;
    }
    Ok(if all { EXIT_OK } else { EXIT_CHECKS_FAILED })
}

struct Checks<'a, W: Write> {
    out: &'a mut W,
    failed: usize,
}

impl<W: Write> Checks<'_, W> {
    fn line(&mut self, name: &str, ok: bool, detail: String) -> CliResult<()> {
        if !ok {
            self.failed += 1;
        }
        writeln!(self.out, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }).map_err(io_at(None))
    }
}

pub fn verify(a: &VerifyArgs) -> CliResult<u8> {
    let s = parabolic_strengths(2.0, 1.0)?;
    let st = settings(a.t_max, None, None)?;
    let mut stdout = io::stdout().lock();
    let mut c = Checks { out: &mut stdout, failed: 0 };

    let r_minus = preset_start(TABLE1[0].r, s)?;
    let rep = oracle_compare(&r_minus, &s, &st, 0.5)?;
    c.line(
        "oracle r-",
        rep.max_r_discrepancy < 1e-8 && rep.notice.is_none(),
        format!("max side discrepancy {:.1e} over [0, 0.5]", rep.max_r_discrepancy),
    )?;
    let equal = VortexStrengths::new(1.0, 1.0, 1.0)?;
    let eq_state = positions_from_config(&InitialSpec::new([1.0 / 3.0; 3], 1, equal)?)?;
    let rep = oracle_compare(&eq_state, &equal, &st, 0.5)?;
    c.line(
        "oracle equilateral",
        rep.max_r_discrepancy < 1e-9,
        format!("max side discrepancy {:.1e}", rep.max_r_discrepancy),
    )?;

    let x = curve_point(0.4, &s)?;
    let rec = trivortex::dynamics::integrate(
        &preset_start(x.x, s)?,
        &s,
        &st.with_t_max(0.1),
        &[],
    )?;
    let shape = rec.samples.iter().map(|sm| sm.x.max_distance(&x)).fold(0.0, f64::max);
    let law = SimilarSolutionParams::new(&x, &s, 1, 1.0)?;
    let p_err = rec
        .samples
        .iter()
        .map(|sm| ((sm.p * sm.p - 1.0 - law.rate() * sm.t) / (sm.p * sm.p)).abs())
        .fold(0.0, f64::max);
    c.line(
        "self-similar x1=0.4",
        shape < 1e-6 && p_err < 1e-6,
        format!("shape drift {shape:.1e}, perimeter law error {p_err:.1e}"),
    )?;

    for row in &TABLE1 {
        let (rec, _) = run_to_convergence(&preset_start(row.r, s)?, &s, &st, DEFAULT_TOL_CONV)?;
        let d = rec.drift()?;
        c.line(
            &format!("invariants {}", row.name),
            d.ibar_rel < 1e-6 && d.a_rel < 1e-6 && d.b_rel < 1e-6 && rec.caly_sign_changes(1e-10) == 0,
            format!(
                "drift Ibar {:.1e}, a {:.1e}, b {:.1e}, impulse {:.1e}, polar moment {:.1e}",
                d.ibar_rel, d.a_rel, d.b_rel, d.impulse_abs, d.polar_moment_abs
            ),
        )?;
    }

    for gamma in [1i8, -1] {
        for ib in [0.40, 0.55, 0.70, 0.85, 0.95] {
            for caly in [-0.005, 0.005] {
                // clockwise departures exist only above Ī4
                let Ok(x) = point_at_offset(ib, caly, gamma, &s) else {
                    continue;
                };
                let pred = predict(&x, &s)?;
                if pred.kind == DepartureType::Periodic {
                    continue;
                }
                let state = positions_from_config(&InitialSpec::from_point(&x, s)?)?;
                let (_, rep) = run_to_convergence(&state, &s, &st, DEFAULT_TOL_CONV)?;
                c.line(
                    &format!("predict/observe gamma={gamma:+} Ibar={ib:.2} calY={caly:+.3}"),
                    rep.observed_type == Some(pred.kind) && rep.converged,
                    format!(
                        "predicted {}, observed {}, final branch {}",
                        pred.kind,
                        rep.observed_type.map_or("-".into(), |t| t.to_string()),
                        rep.final_branch
                    ),
                )?;
            }
        }
    }

    let failed = c.failed;
    writeln!(stdout, "{}", if failed == 0 { "all checks passed".into() } else { format!("{failed} checks failed") })
        .map_err(io_at(None))?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECKS_FAILED })
}
