use thiserror::Error;

use crate::metric::PointId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed space: {0}")]
    MalformedSpace(String),

    #[error("point {index} out of range for a space with {len} points")]
    InvalidPoint { index: usize, len: usize },

    #[error("no path between {from} and {to}")]
    Unreachable { from: PointId, to: PointId },

    #[error("duplicate point: {0}")]
    DuplicatePoint(String),

    #[error("points {x} and {y} are at distance 0 but the field differs")]
    DegenerateMetric { x: PointId, y: PointId },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("no {eps}-chain joins {x} and {y}")]
    NoChain { x: PointId, y: PointId, eps: f64 },

    #[error("curve family is empty or unrealizable")]
    EmptyFamily,

    #[error("no convergence after {iterations} iterations (bounds [{lower}, {upper}])")]
    IterationLimit {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("more than {limit} simple paths in family")]
    PathLimit { limit: usize },

    #[error("unsupported exponent {0}; expected 1, 2 or inf")]
    UnsupportedExponent(String),

    #[error("dilation {0} must be at least 1")]
    InvalidDilation(f64),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("solver failure: {0}")]
    Solver(String),
}
