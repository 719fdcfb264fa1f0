//! Planar motion of three point vortices in the parabolic case `K = 0`.
//!
//! The crate is organised bottom-up:
//!
//! * [`vortex`] holds strengths, positions, the vortex triangle and the
//!   Kirchhoff invariants.
//! * [`geometry`] maps triangles to trilinear and `(alpha, beta)` coordinates
//!   and locates the critical curve, its critical points and the strip of
//!   trajectories that meet it.
//! * [`dynamics`] integrates the equations of motion in the complex plane and
//!   carries the side-length and trilinear formulations as cross-checks.
//! * [`initcond`] builds vortex positions from a prescribed triangle and finds
//!   starts at a given offset from the critical curve.
//! * [`classify`] predicts and observes how a trajectory leaves a contracting
//!   branch of the critical curve.

// `!(a > b)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dynamics;
mod error;
pub mod geometry;
pub mod initcond;
pub mod vortex;

pub use error::{Error, Result};
pub use geometry::{AlphaBeta, CriticalPoints, TrilinearPoint};
pub use vortex::{Configuration, Invariants, Regime, VortexState, VortexStrengths};
