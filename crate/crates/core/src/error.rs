use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curve spec has no segments")]
    EmptySpec,

    #[error("invalid segment {index}: {reason}")]
    InvalidSegment { index: usize, reason: String },

    #[error("segments {from} and {to} do not join (gap {gap:e})")]
    OpenJoint { from: usize, to: usize, gap: f64 },

    #[error("non-simple curve: polyline edges {0} and {1} intersect")]
    NonSimple(usize, usize),

    #[error("degenerate parameterization at t = {0}")]
    DegenerateParameterization(f64),

    #[error("curve has corner joints; curvature is undefined there")]
    CornerCurve,

    #[error("invalid construction parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid bracket [{low}, {high}]: {reason}")]
    InvalidBracket { low: f64, high: f64, reason: String },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
