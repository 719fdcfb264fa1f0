use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid strengths k1 = {k1}, k2 = {k2}: require k1 >= k2 > 0")]
    InvalidStrengths { k1: f64, k2: f64 },

    #[error("vortex collision: shortest side {min_side:e} at perimeter {perimeter:e}")]
    Collision { min_side: f64, perimeter: f64 },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("inconsistent configuration: {0}")]
    InconsistentConfiguration(String),

    #[error("invariant diverges at a vertex of the admissible triangle")]
    DivergentInvariant,

    #[error("no admissible point of the critical curve at x1 = {x1}")]
    OffCurveDomain { x1: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("orientation undefined for a collinear configuration")]
    UndefinedDirection,

    #[error("point is not on the critical curve (calY = {caly:e})")]
    NotOnCurve { caly: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoSolution { iterations: usize, residual: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
}
