//! Dormand–Prince 5(4) with dense output and PI step-size control.
//!
//! Coefficients and controller constants follow Hairer, Nørsett & Wanner,
//! *Solving Ordinary Differential Equations I*, the DOPRI5 code.

use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Fourth-order interpolant on `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.cont;
        std::array::from_fn(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

pub struct Dopri5<F, const N: usize> {
    f: F,
    opts: SolverOptions,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    fac_old: f64,
    rejected: bool,
    pub evaluations: usize,
    pub accepted: usize,
    pub rejections: usize,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    pub fn new(mut f: F, t0: f64, y0: [f64; N], opts: SolverOptions) -> Result<Self> {
        if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0 && opts.max_step > 0.0) {
            return Err(Error::InvalidSettings(format!("{opts:?}")));
        }
        let k1 = f(t0, &y0)?;
        let mut solver = Self {
            f,
            opts,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            fac_old: 1e-4,
            rejected: false,
            evaluations: 1,
            accepted: 0,
            rejections: 0,
        };
        solver.h = solver.initial_step()?;
        Ok(solver)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    fn scale(&self, a: &[f64; N], b: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| self.opts.abs_tol + self.opts.rel_tol * a[i].abs().max(b[i].abs()))
    }

    fn rms(v: &[f64; N], sc: &[f64; N]) -> f64 {
        (v.iter().zip(sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / N as f64).sqrt()
    }

    // Hairer's starting step heuristic
    fn initial_step(&mut self) -> Result<f64> {
        let sc = self.scale(&self.y, &self.y);
        let d0 = Self::rms(&self.y, &sc);
        let d1 = Self::rms(&self.k1, &sc);
        let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.opts.max_step);
        let y1 = axpy(&self.y, h0, &[(1.0, &self.k1)]);
        let k2 = (self.f)(self.t + h0, &y1)?;
        self.evaluations += 1;
        let diff: [f64; N] = std::array::from_fn(|i| k2[i] - self.k1[i]);
        let d2 = Self::rms(&diff, &sc) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(self.opts.max_step))
    }

    /// Advances by one accepted step without passing `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<DenseStep<N>> {
        loop {
            let remaining = t_end - self.t;
            let mut h = self.h.min(self.opts.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            match self.attempt(h) {
                Ok((y1, k7, err, cont)) => {
                    if err <= 1.0 {
                        let fac11 = err.powf(EXPO);
                        let fac = (fac11 / self.fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                        let mut h_new = h / fac;
                        if self.rejected {
                            h_new = h_new.min(h);
                        }
                        self.fac_old = err.max(1e-4);
                        self.rejected = false;
                        self.accepted += 1;
                        let step = DenseStep {
                            t0: self.t,
                            h,
                            y0: self.y,
                            y1,
                            cont,
                        };
                        self.t = if last { t_end } else { self.t + h };
                        self.y = y1;
                        self.k1 = k7;
                        self.h = h_new;
                        return Ok(step);
                    }
                    let fac11 = err.powf(EXPO);
                    self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
                    self.rejected = true;
                    self.rejections += 1;
                }
                // a singular right-hand side inside the trial step
                Err(_) => {
                    self.h = 0.25 * h;
                    self.rejected = true;
                    self.rejections += 1;
                }
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn attempt(&mut self, h: f64) -> Result<([f64; N], [f64; N], f64, [[f64; N]; 5])> {
        let (t, y, k1) = (self.t, self.y, self.k1);
        let f = &mut self.f;
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y1)?;
        self.evaluations += 6;

        let err_vec: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err = Self::rms(&err_vec, &self.scale(&y, &y1));
        if !err.is_finite() {
            return Err(Error::StepUnderflow { t, h });
        }

        let r2: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
        let r3: [f64; N] = std::array::from_fn(|i| h * k1[i] - r2[i]);
        let r4: [f64; N] = std::array::from_fn(|i| r2[i] - h * k7[i] - r3[i]);
        let r5: [f64; N] = std::array::from_fn(|i| {
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
        });
        Ok((y1, k7, err, [y, r2, r3, r4, r5]))
    }
}

/// Integrates to each of `times` (ascending, starting at or after `t0`) and
/// returns the dense-output values there.
pub fn solve_at<F, const N: usize>(
    f: F,
    t0: f64,
    y0: [f64; N],
    times: &[f64],
    opts: SolverOptions,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut out = Vec::with_capacity(times.len());
    let Some(&t_end) = times.last() else {
        return Ok(out);
    };
    let mut solver = Dopri5::new(f, t0, y0, opts)?;
    let mut pending = times.iter().copied().peekable();
    while let Some(&t) = pending.peek() {
        if t <= t0 {
            out.push(y0);
            pending.next();
        } else {
            break;
        }
    }
    while pending.peek().is_some() {
        let step = solver.step(t_end)?;
        while let Some(&t) = pending.peek() {
            if t <= step.t1() {
                out.push(if t == step.t1() { step.y1 } else { step.eval(t) });
                pending.next();
            } else {
                break;
            }
        }
    }
    Ok(out)
}
