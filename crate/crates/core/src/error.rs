//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown label index {index} (model has {size} points)")]
    UnknownLabel { index: usize, size: usize },

    #[error("coordinate is not finite: {0}")]
    NonFiniteCoordinate(f64),

    #[error("invalid spacetime model: {0}")]
    InvalidModel(String),

    #[error("points are not causally related")]
    NotCausallyRelated,

    #[error("operation not supported on this spacetime model: {0}")]
    CapabilityMissing(&'static str),

    #[error("covector is not causal (negative action on a causal vector)")]
    NonCausalCovector,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid coupling: {0}")]
    InvalidPlan(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {0} is not on the grid")]
    OffGridTime(f64),

    #[error("consecutive measures are not causally ordered at step {step}")]
    PathInfeasibleStep { step: usize },

    #[error("invalid exponent p = {0}: need p < 1 and p != 0")]
    InvalidExponent(f64),

    #[error("duality check failed: {0}")]
    DualityGap(String),

    #[error("property violation in {property} at {location}")]
    PropertyViolation { property: String, location: String },

    #[error("invalid steep field: {0}")]
    InvalidField(String),

    #[error("velocity field does not cover the path: {0}")]
    DomainMismatch(String),

    #[error("causal continuity inequality prerequisite failed: {0}")]
    CciPrerequisiteFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),
}
