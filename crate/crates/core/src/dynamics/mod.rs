//! Time integration of the three-vortex problem.
//!
//! [`integrate`] advances the complex-plane equations with an adaptive
//! Dormand–Prince pair, records every accepted step, locates edge crossings
//! and user events on the dense interpolant, and stops at `t_max`, at a
//! terminal event or when the triangle collapses below the collision floor.

pub mod formulations;
pub mod oracle;
pub mod similar;
pub mod solver;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{cal_y, ibar, reduce, TrilinearPoint};
use crate::vortex::{configuration_of, invariants_of, Configuration, Invariants, VortexState, VortexStrengths};
use crate::{Error, Result};

pub use formulations::{rhs_r, rhs_trilinear, rhs_z, TrilinearRates};
pub use oracle::{oracle_compare, OracleReport};
pub use similar::{similar_solution, PerimeterValue, SimilarSolutionParams};
use solver::{DenseStep, Dopri5, SolverOptions};

/// Bisection tolerance for event times.
pub const EVENT_TIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_max: f64,
    /// Smallest allowed side, relative to the initial perimeter and to the
    /// current one.
    pub collision_floor: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_step: 0.01,
            t_max: 200.0,
            collision_floor: 1e-6,
        }
    }
}

impl IntegratorSettings {
    pub fn with_t_max(self, t_max: f64) -> Self {
        Self { t_max, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.rel_tol, self.abs_tol, self.max_step, self.t_max, self.collision_floor]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return Err(Error::InvalidSettings(format!("all settings must be positive: {self:?}")));
        }
        if self.rel_tol < 1e-14 {
            return Err(Error::InvalidSettings(format!(
                "rel_tol = {:e} is below 1e-14",
                self.rel_tol
            )));
        }
        Ok(())
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
        }
    }
}

/// A state together with its triangle and trilinear image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: VortexState,
    pub config: Configuration,
    pub x: TrilinearPoint,
    pub caly: f64,
    pub ibar: f64,
    pub p: f64,
}

impl TrajectorySample {
    pub fn from_state(state: &VortexState, s: &VortexStrengths) -> Result<Self> {
        let config = configuration_of(state)?;
        let x = reduce(&config)?;
        Ok(Self {
            t: state.t,
            state: *state,
            config,
            x,
            caly: cal_y(&x, s),
            ibar: ibar(&x, s)?,
            p: config.p,
        })
    }
}

/// Edges of `Δ_Q`, named by the vertices they join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Edge {
    /// `x3 = 1/2`
    Q1Q2,
    /// `x1 = 1/2`
    Q2Q3,
    /// `x2 = 1/2`
    Q3Q1,
}

impl Edge {
    /// The edge on which the longest side equals half the perimeter.
    pub fn of_longest(x: &[f64; 3]) -> Self {
        let j = (0..3).max_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap_or(0);
        match j {
            0 => Edge::Q2Q3,
            1 => Edge::Q3Q1,
            _ => Edge::Q1Q2,
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Edge::Q2Q3 => 0,
            Edge::Q3Q1 => 1,
            Edge::Q1Q2 => 2,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Edge::Q1Q2 => "Q1Q2",
            Edge::Q2Q3 => "Q2Q3",
            Edge::Q3Q1 => "Q3Q1",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCrossing {
    pub t_cross: f64,
    pub edge: Edge,
    pub gamma_before: i8,
    pub gamma_after: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

impl Direction {
    fn triggers(&self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Either => rising || falling,
        }
    }
}

type EventFn = Box<dyn Fn(&TrajectorySample) -> f64 + Send + Sync>;

/// A scalar function of the sample whose zeros are located during
/// integration.
pub struct Event {
    pub label: String,
    pub direction: Direction,
    pub terminal: bool,
    f: EventFn,
}

impl Event {
    pub fn new(
        label: impl Into<String>,
        direction: Direction,
        terminal: bool,
        f: impl Fn(&TrajectorySample) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            direction,
            terminal,
            f: Box::new(f),
        }
    }

    /// Stops the run once `|𝒴|` falls to `threshold`.
    pub fn caly_below(threshold: f64) -> Self {
        Self::new("caly_below", Direction::Falling, true, move |s| s.caly.abs() - threshold)
    }

    pub fn value(&self, sample: &TrajectorySample) -> f64 {
        (self.f)(sample)
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Event")
            .field("label", &self.label)
            .field("direction", &self.direction)
            .field("terminal", &self.terminal)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventHit {
    pub label: String,
    pub t: f64,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    TimeLimit,
    TerminalEvent { label: String },
    Collision { t: f64, min_side: f64, perimeter: f64 },
    StepUnderflow { t: f64, h: f64 },
}

/// Largest deviations of the conserved quantities from their initial values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantDrift {
    pub ibar_rel: f64,
    pub a_rel: f64,
    pub b_rel: f64,
    /// `max |Σ k_j z_j(t) - Σ k_j z_j(0)|`.
    pub impulse_abs: f64,
    /// `max |Σ k_j |z_j|²(t) - Σ k_j |z_j|²(0)|`.
    pub polar_moment_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub strengths: VortexStrengths,
    pub settings: IntegratorSettings,
    pub samples: Vec<TrajectorySample>,
    pub crossings: Vec<EdgeCrossing>,
    pub events: Vec<EventHit>,
    pub termination: Termination,
    pub rejected_steps: usize,
}

impl TrajectoryRecord {
    pub fn first(&self) -> &TrajectorySample {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("a record holds at least the initial sample")
    }

    pub fn drift(&self) -> Result<InvariantDrift> {
        let s = &self.strengths;
        let inv0 = invariants_of(&self.first().state, s)?;
        let j0 = Invariants::linear_impulse(&self.first().state, s);
        let mut d = InvariantDrift {
            ibar_rel: 0.0,
            a_rel: 0.0,
            b_rel: 0.0,
            impulse_abs: 0.0,
            polar_moment_abs: 0.0,
        };
        let rel = |v: f64, v0: f64| ((v - v0) / v0).abs();
        for sample in &self.samples[1..] {
            let inv = invariants_of(&sample.state, s)?;
            d.ibar_rel = d.ibar_rel.max(rel(inv.ibar, inv0.ibar));
            d.a_rel = d.a_rel.max(rel(inv.a, inv0.a));
            d.b_rel = d.b_rel.max(rel(inv.b, inv0.b));
            d.impulse_abs = d
                .impulse_abs
                .max((Invariants::linear_impulse(&sample.state, s) - j0).norm());
            d.polar_moment_abs = d
                .polar_moment_abs
                .max((inv.polar_moment - inv0.polar_moment).abs());
        }
        Ok(d)
    }

    /// Number of sign changes of `𝒴` over the samples, ignoring values within
    /// `floor` of zero.
    pub fn caly_sign_changes(&self, floor: f64) -> usize {
        let mut last = 0.0_f64;
        let mut changes = 0;
        for v in self.samples.iter().map(|s| s.caly).filter(|v| v.abs() > floor) {
            if last != 0.0 && v.signum() != last.signum() {
                changes += 1;
            }
            last = v;
        }
        changes
    }

    /// `n` samples on a uniform time grid, by cubic Hermite interpolation of
    /// the positions between accepted steps.
    pub fn resample(&self, n: usize) -> Result<Vec<TrajectorySample>> {
        let s = &self.strengths;
        let t0 = self.first().t;
        let t1 = self.last().t;
        if n == 0 {
            return Ok(Vec::new());
        }
        if n == 1 || self.samples.len() == 1 {
            return Ok(vec![*self.first()]);
        }
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for i in 0..n {
            let t = if i + 1 == n { t1 } else { t0 + (t1 - t0) * i as f64 / (n - 1) as f64 };
            while seg + 2 < self.samples.len() && self.samples[seg + 1].t < t {
                seg += 1;
            }
            let (a, b) = (&self.samples[seg], &self.samples[seg + 1]);
            if t == a.t {
                out.push(*a);
                continue;
            }
            if t == b.t {
                out.push(*b);
                continue;
            }
            let h = b.t - a.t;
            let u = (t - a.t) / h;
            let da = rhs_z(&a.state, s)?;
            let db = rhs_z(&b.state, s)?;
            let h00 = (1.0 + 2.0 * u) * (1.0 - u).powi(2);
            let h10 = u * (1.0 - u).powi(2);
            let h01 = u * u * (3.0 - 2.0 * u);
            let h11 = u * u * (u - 1.0);
            let z: [Complex64; 3] = std::array::from_fn(|j| {
                a.state.z[j] * h00 + da[j] * (h * h10) + b.state.z[j] * h01 + db[j] * (h * h11)
            });
            out.push(TrajectorySample::from_state(&VortexState::new(t, z), s)?);
        }
        Ok(out)
    }
}

fn bisect(mut lo: f64, mut hi: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let mut g_lo = g(lo);
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn dense_state(step: &DenseStep<6>, t: f64) -> VortexState {
    VortexState::from_vector(t, &step.eval(t))
}

fn dense_sample(step: &DenseStep<6>, t: f64, s: &VortexStrengths) -> Result<TrajectorySample> {
    TrajectorySample::from_state(&dense_state(step, t), s)
}

fn breaches_floor(state: &VortexState, p0: f64, floor: f64) -> Option<(f64, f64)> {
    let r = state.sides();
    let p = r.iter().sum::<f64>();
    let min_side = r.iter().copied().fold(f64::INFINITY, f64::min);
    let collapsed = !(min_side >= floor * p0) || !(min_side >= floor * p);
    collapsed.then_some((min_side, p))
}

/// Integrates the complex-plane equations from `state0`.
pub fn integrate(
    state0: &VortexState,
    s: &VortexStrengths,
    settings: &IntegratorSettings,
    events: &[Event],
) -> Result<TrajectoryRecord> {
    settings.validate()?;
    let first = TrajectorySample::from_state(state0, s)?;
    let p0 = first.p;
    let t_end = state0.t + settings.t_max;
    let mut solver = Dopri5::new(
        |_t, y: &[f64; 6]| formulations::rhs_z_vec(y, s),
        state0.t,
        state0.to_vector(),
        settings.solver_options(),
    )?;

    let mut samples = vec![first];
    let mut crossings = Vec::new();
    let mut hits = Vec::new();
    let mut event_values: Vec<f64> = events.iter().map(|e| e.value(&first)).collect();
    let mut prev = first;

    let termination = loop {
        let step = match solver.step(t_end) {
            Ok(step) => step,
            Err(Error::StepUnderflow { t, h }) => break Termination::StepUnderflow { t, h },
            Err(e) => return Err(e),
        };
        let t1 = solver.t();
        let end_state = VortexState::from_vector(t1, &step.y1);

        if let Some((min_side, perimeter)) = breaches_floor(&end_state, p0, settings.collision_floor) {
            if let Ok(sample) = TrajectorySample::from_state(&end_state, s) {
                samples.push(sample);
            }
            break Termination::Collision { t: t1, min_side, perimeter };
        }
        let current = TrajectorySample::from_state(&end_state, s)?;

        // earliest terminal event inside this step
        let mut stop: Option<(f64, usize)> = None;
        let mut step_hits = Vec::new();
        let new_values: Vec<f64> = events.iter().map(|e| e.value(&current)).collect();
        for (i, ev) in events.iter().enumerate() {
            if !ev.direction.triggers(event_values[i], new_values[i]) {
                continue;
            }
            let t_hit = bisect(prev.t, t1, |t| match dense_sample(&step, t, s) {
                Ok(sm) => ev.value(&sm),
                Err(_) => new_values[i],
            });
            step_hits.push((t_hit, i));
            if ev.terminal && stop.is_none_or(|(ts, _)| t_hit < ts) {
                stop = Some((t_hit, i));
            }
        }
        let horizon = stop.map_or(t1, |(ts, _)| ts);
        step_hits.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t_hit, i) in step_hits.into_iter().filter(|(t, _)| *t <= horizon) {
            hits.push(EventHit {
                label: events[i].label.clone(),
                t: t_hit,
                terminal: events[i].terminal,
            });
        }

        let a0 = prev.state.twice_signed_area();
        let a1 = if stop.is_some() {
            dense_state(&step, horizon).twice_signed_area()
        } else {
            end_state.twice_signed_area()
        };
        if a0 != 0.0 && a1 != 0.0 && (a0 > 0.0) != (a1 > 0.0) {
            let t_cross = bisect(prev.t, horizon, |t| dense_state(&step, t).twice_signed_area());
            let sides = dense_state(&step, t_cross).sides();
            crossings.push(EdgeCrossing {
                t_cross,
                edge: Edge::of_longest(&sides),
                gamma_before: if a0 > 0.0 { 1 } else { -1 },
                gamma_after: if a1 > 0.0 { 1 } else { -1 },
            });
        }

        if let Some((ts, i)) = stop {
            samples.push(dense_sample(&step, ts, s)?);
            break Termination::TerminalEvent {
                label: events[i].label.clone(),
            };
        }
        samples.push(current);
        event_values = new_values;
        prev = current;
        if t1 >= t_end {
            break Termination::TimeLimit;
        }
    };

    Ok(TrajectoryRecord {
        strengths: *s,
        settings: *settings,
        samples,
        crossings,
        events: hits,
        termination,
        rejected_steps: solver.rejections,
    })
}

/// One independent integration for [`integrate_many`].
#[derive(Debug)]
pub struct IntegrationJob {
    pub state0: VortexState,
    pub strengths: VortexStrengths,
    pub settings: IntegratorSettings,
    pub events: Vec<Event>,
}

/// Runs independent integrations on scoped threads; results keep the order of
/// `jobs`.
pub fn integrate_many(jobs: &[IntegrationJob]) -> Vec<Result<TrajectoryRecord>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).max(1);
    let mut out = Vec::with_capacity(jobs.len());
    for chunk in jobs.chunks(workers) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|job| {
                    scope.spawn(move || integrate(&job.state0, &job.strengths, &job.settings, &job.events))
                })
                .collect();
            for h in handles {
                out.push(h.join().unwrap_or_else(|_| {
                    Err(Error::InvalidSettings("integration thread panicked".into()))
                }));
            }
        });
    }
    out
}
