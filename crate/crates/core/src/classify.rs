//! Departure types from the contracting branch, predicted from the start and
//! observed along an integrated trajectory.
//!
//! With counterclockwise orientation a start below `𝒞` in the strip leaves
//! through the edge `Q3Q1` and settles on the image branch `E*Q5` (type I). A
//! start above `𝒞` with `Ī4 < Ī < 1` reaches `Q4E` without crossing an edge
//! (type II); one with `Ī5 < Ī < Ī4` crosses `Q2Q3` and settles on `E*Q5`
//! (type III).
//!
//! Clockwise starts mirror this about `x1 = x2`: below `𝒞` the trajectory
//! leaves `E*Q4` through `Q2Q3` and settles on `Q4E` (type I), and above it
//! reaches `E*Q5` directly (type II). There is no clockwise type III, and a
//! clockwise start with `Ī5 < Ī <= Ī4` lies on no departure from `E*Q4`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, EdgeCrossing, Event, IntegratorSettings, TrajectoryRecord};
use crate::geometry::{cal_y, critical_points, ibar, TrilinearPoint};
use crate::vortex::{VortexState, VortexStrengths};
use crate::{Error, Result};

/// `|𝒴|` at or below which a start counts as on the curve.
pub const ON_CURVE_TOL: f64 = 1e-12;
pub const DEFAULT_TOL_CONV: f64 = 1e-4;
pub const CONVERGENCE_WINDOW: usize = 10;
pub const SIMILARITY_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DepartureType {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "III")]
    III,
    #[serde(rename = "periodic")]
    Periodic,
    #[serde(rename = "on-curve")]
    OnCurve,
}

impl fmt::Display for DepartureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepartureType::I => "I",
            DepartureType::II => "II",
            DepartureType::III => "III",
            DepartureType::Periodic => "periodic",
            DepartureType::OnCurve => "on-curve",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    BelowCurve,
    /// Above `𝒞` with `Ī4 < Ī < 1`.
    AboveCurveS4Plus,
    /// Above `𝒞` with `Ī5 < Ī < Ī4`.
    AboveCurveS5Plus,
    /// Above `𝒞` with clockwise orientation.
    AboveCurveMirror,
    OutsideStrip,
    OnCurve,
}

/// Branches of `𝒞` and of its mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "Q4E")]
    Q4E,
    #[serde(rename = "EQ5")]
    EQ5,
    #[serde(rename = "E*Q4")]
    EStarQ4,
    #[serde(rename = "E*Q5")]
    EStarQ5,
}

impl Branch {
    /// The branch on the same side of `E` as `x`, for its orientation.
    pub fn of(x: &TrilinearPoint) -> Self {
        let left = x.x1() > x.x2();
        match (x.gamma >= 0, left) {
            (true, true) => Branch::Q4E,
            (true, false) => Branch::EQ5,
            (false, true) => Branch::EStarQ4,
            (false, false) => Branch::EStarQ5,
        }
    }

    pub fn is_expanding(&self) -> bool {
        matches!(self, Branch::Q4E | Branch::EStarQ5)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Q4E => "Q4E",
            Branch::EQ5 => "EQ5",
            Branch::EStarQ4 => "E*Q4",
            Branch::EStarQ5 => "E*Q5",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypePrediction {
    #[serde(rename = "type")]
    pub kind: DepartureType,
    pub basis: Basis,
    pub branch_start: Branch,
    pub caly: f64,
    pub ibar: f64,
}

pub fn predict(x0: &TrilinearPoint, s: &VortexStrengths) -> Result<TypePrediction> {
    let cp = critical_points(s)?;
    let caly = cal_y(x0, s);
    let ib = ibar(x0, s)?;
    let branch_start = Branch::of(x0);
    let (kind, basis) = if caly.abs() <= ON_CURVE_TOL {
        (DepartureType::OnCurve, Basis::OnCurve)
    } else if !(ib > cp.i5 && ib < 1.0) {
        (DepartureType::Periodic, Basis::OutsideStrip)
    } else if x0.gamma < 0 && ib <= cp.i4 {
        return Err(Error::OutOfRange(format!(
            "clockwise start with Ī = {ib} <= Ī4 = {} does not depart from E*Q4",
            cp.i4
        )));
    } else if caly < 0.0 {
        (DepartureType::I, Basis::BelowCurve)
    } else if x0.gamma < 0 {
        (DepartureType::II, Basis::AboveCurveMirror)
    } else if ib > cp.i4 {
        (DepartureType::II, Basis::AboveCurveS4Plus)
    } else {
        (DepartureType::III, Basis::AboveCurveS5Plus)
    };
    Ok(TypePrediction {
        kind,
        basis,
        branch_start,
        caly,
        ibar: ib,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Start of the final stretch with `|𝒴| < tol_conv`, or the last sample
    /// time when unconverged.
    pub t_conv: f64,
    pub final_point: TrilinearPoint,
    pub final_branch: Branch,
    pub crossings: Vec<EdgeCrossing>,
    pub caly_extrema_count: usize,
    /// `None` when the start side and crossing count match no type.
    pub observed_type: Option<DepartureType>,
}

/// Turning points of a sequence, ignoring reversals smaller than `h`.
fn count_extrema(values: &[f64], h: f64) -> usize {
    let Some(&v0) = values.first() else {
        return 0;
    };
    let mut dir = 0i8;
    let mut ext = v0;
    let mut count = 0;
    for &v in &values[1..] {
        match dir {
            0 if v > v0 + h => (dir, ext) = (1, v),
            0 if v < v0 - h => (dir, ext) = (-1, v),
            1 if v > ext => ext = v,
            1 if ext - v > h => (dir, ext, count) = (-1, v, count + 1),
            -1 if v < ext => ext = v,
            -1 if v - ext > h => (dir, ext, count) = (1, v, count + 1),
            _ => {}
        }
    }
    count
}

fn observed_type(caly0: f64, crossings: usize) -> Option<DepartureType> {
    match (caly0 > 0.0, crossings) {
        (false, 1) if caly0 < 0.0 => Some(DepartureType::I),
        (true, 0) => Some(DepartureType::II),
        (true, 1) => Some(DepartureType::III),
        _ => None,
    }
}

pub fn observe(record: &TrajectoryRecord, _s: &VortexStrengths, tol_conv: f64) -> ConvergenceReport {
    let samples = &record.samples;
    let caly: Vec<f64> = samples.iter().map(|s| s.caly).collect();
    let last = record.last();
    let final_branch = Branch::of(&last.x);

    let tail_start = caly
        .iter()
        .rposition(|v| !(v.abs() < tol_conv))
        .map_or(0, |i| i + 1);
    let tail = &caly[tail_start..];
    let window = &tail[tail.len().saturating_sub(CONVERGENCE_WINDOW)..];
    let settling = window.len() == CONVERGENCE_WINDOW
        && window.windows(2).all(|w| w[1].abs() <= w[0].abs() + 1e-13);
    let converged = settling && last.x.gamma != 0 && final_branch.is_expanding();
    let t_conv = if converged { samples[tail_start].t } else { last.t };

    let scale = caly.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    ConvergenceReport {
        converged,
        t_conv,
        final_point: last.x,
        final_branch,
        crossings: record.crossings.clone(),
        caly_extrema_count: count_extrema(&caly, (1e-3 * scale).max(1e-15)),
        observed_type: observed_type(caly[0], record.crossings.len()),
    }
}

/// Integrates from `state0` until `|𝒴|` drops to a tenth of `tol_conv` or
/// the time limit, then observes the run.
pub fn run_to_convergence(
    state0: &VortexState,
    s: &VortexStrengths,
    settings: &IntegratorSettings,
    tol_conv: f64,
) -> Result<(TrajectoryRecord, ConvergenceReport)> {
    let stop = Event::caly_below(0.1 * tol_conv);
    let record = integrate(state0, s, settings, &[stop])?;
    let report = observe(&record, s, tol_conv);
    Ok((record, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Similarity {
    SimilarWithFlip,
    Dissimilar,
}

pub fn similarity_check(x_initial: &TrilinearPoint, x_final: &TrilinearPoint) -> Similarity {
    similarity_check_with(x_initial, x_final, SIMILARITY_THRESHOLD)
}

pub fn similarity_check_with(
    x_initial: &TrilinearPoint,
    x_final: &TrilinearPoint,
    threshold: f64,
) -> Similarity {
    if x_initial.max_distance(x_final) < threshold && x_initial.gamma != x_final.gamma {
        Similarity::SimilarWithFlip
    } else {
        Similarity::Dissimilar
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initcond::{point_at_offset, TABLE1};
    use crate::vortex::parabolic_strengths;

    fn k21() -> VortexStrengths {
        parabolic_strengths(2.0, 1.0).unwrap()
    }

    fn kind(r: [f64; 3], gamma: i8) -> DepartureType {
        predict(&TrilinearPoint::new(r, gamma), &k21()).unwrap().kind
    }

    #[test]
    fn table_predictions() {
        assert_eq!(kind(TABLE1[0].r, 1), DepartureType::I);
        assert_eq!(kind(TABLE1[1].r, 1), DepartureType::II);
        assert_eq!(kind(TABLE1[2].r, 1), DepartureType::I);
        assert_eq!(kind(TABLE1[3].r, 1), DepartureType::III);
        let p = predict(&TrilinearPoint::new(TABLE1[3].r, 1), &k21()).unwrap();
        assert_eq!(p.basis, Basis::AboveCurveS5Plus);
        assert_eq!(p.branch_start, Branch::EQ5);
    }

    #[test]
    fn clockwise_mirror_rule() {
        let s = k21();
        let cp = critical_points(&s).unwrap();
        let below = point_at_offset(0.7, -0.005, -1, &s).unwrap();
        let above = point_at_offset(0.7, 0.005, -1, &s).unwrap();
        assert!(below.x1() > below.x2());
        let pb = predict(&below, &s).unwrap();
        assert_eq!((pb.kind, pb.branch_start), (DepartureType::I, Branch::EStarQ4));
        let pa = predict(&above, &s).unwrap();
        assert_eq!((pa.kind, pa.basis), (DepartureType::II, Basis::AboveCurveMirror));
        let low = TrilinearPoint::new(point_at_offset(0.5 * (cp.i4 + cp.i5), 0.005, 1, &s).unwrap().x, -1);
        assert!(matches!(predict(&low, &s), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn periodic_and_on_curve() {
        let s = k21();
        // Ī above 1, near the vertex Q1 side
        let x = TrilinearPoint::new([0.3, 0.45, 0.25], 1);
        assert!(ibar(&x, &s).unwrap() > 1.0);
        assert_eq!(predict(&x, &s).unwrap().kind, DepartureType::Periodic);
        let e = TrilinearPoint::centroid();
        assert_eq!(predict(&e, &s).unwrap().kind, DepartureType::OnCurve);
    }

    #[test]
    fn branches() {
        let left = TrilinearPoint::new([0.4, 0.25, 0.35], 1);
        assert_eq!(Branch::of(&left), Branch::Q4E);
        assert!(Branch::of(&left).is_expanding());
        assert_eq!(Branch::of(&left.image()), Branch::EStarQ4);
        assert!(!Branch::of(&left.image()).is_expanding());
        let right = TrilinearPoint::new([0.25, 0.4, 0.35], -1);
        assert_eq!(Branch::of(&right), Branch::EStarQ5);
        assert!(Branch::of(&right).is_expanding());
        assert_eq!(Branch::EStarQ5.to_string(), "E*Q5");
    }

    #[test]
    fn extrema_with_hysteresis() {
        let v = [0.0, -1.0, -2.0, -1.9999999, -2.0, -1.0, 0.0];
        assert_eq!(count_extrema(&v, 1e-3), 1);
        let v = [0.0, 1.0, 0.5, 2.0, -1.0, -0.5];
        assert_eq!(count_extrema(&v, 1e-3), 4);
        let v = [0.005, 0.006, 0.004, 0.007, 0.0];
        assert_eq!(count_extrema(&v, 1e-5), 3);
        assert_eq!(count_extrema(&[1.0, 1.0, 1.0], 1e-3), 0);
    }

    #[test]
    fn observed_type_map() {
        assert_eq!(observed_type(-0.005, 1), Some(DepartureType::I));
        assert_eq!(observed_type(0.005, 0), Some(DepartureType::II));
        assert_eq!(observed_type(0.005, 1), Some(DepartureType::III));
        assert_eq!(observed_type(-0.005, 0), None);
        assert_eq!(observed_type(0.005, 2), None);
    }

    #[test]
    fn similarity() {
        let a = TrilinearPoint::new([0.2, 0.44, 0.36], 1);
        let b = TrilinearPoint::new([0.21, 0.435, 0.355], -1);
        assert_eq!(similarity_check(&a, &b), Similarity::SimilarWithFlip);
        assert_eq!(similarity_check(&a, &a), Similarity::Dissimilar);
        let far = TrilinearPoint::new([0.4, 0.25, 0.35], 1);
        assert_eq!(similarity_check(&a, &far.image()), Similarity::Dissimilar);
        assert_eq!(similarity_check_with(&a, &b, 0.001), Similarity::Dissimilar);
    }
}
