use thiserror::Error;

use crate::analytic::Cpx;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {0} lies on a branch cut")]
    BranchCut(Cpx),
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),
    #[error("pole of the isocline radius at phi = {phi}")]
    Pole { phi: f64 },
    #[error("invalid eps = {eps}: {reason}")]
    InvalidEps { eps: f64, reason: &'static str },
    #[error("curve tracing stalled at {at} after {steps} steps")]
    TraceStall { at: Cpx, steps: usize },
    #[error("no convergence in {what} (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },
    #[error("|h| is not monotone along the target component near {at}")]
    MonotonicityViolation { at: Cpx },
    #[error("leaf continuation broke down at y = {at}, x = {x}: {reason}")]
    ContinuationBreakdown {
        at: Cpx,
        x: Cpx,
        reason: String,
    },
    #[error("evaluation at a ramification point y = {0}")]
    AtRamification(Cpx),
    #[error("path hits the ramification point {at} in its interior")]
    LiftAmbiguity { at: Cpx },
    #[error("orbit approaches a singular point at ({x}, {y})")]
    SingularApproach { x: f64, y: f64 },
    #[error("time limit {0} reached without a section crossing")]
    TimeLimit(f64),
    #[error("orbit left the period annulus at ({x}, {y})")]
    EscapeFromAnnulus { x: f64, y: f64 },
    #[error("quadrature failed at level {level}: {reason}")]
    QuadratureFailure { level: f64, reason: &'static str },
    #[error("function vanishes on the contour at {0}")]
    ZeroOnBoundary(Cpx),
    #[error("adaptive refinement limit reached near {0}")]
    RefinementLimit(Cpx),
    #[error("seed {0} does not converge onto the curve")]
    SeedInvalid(Cpx),
    #[error("curves coincide; intersections are not isolated")]
    DegenerateCoincidence,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
