use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("degree overflow: {left} + {right} exceeds chart dimension {dim}")]
    DegreeOverflow { left: usize, right: usize, dim: usize },

    #[error("invalid degree {degree} for {op} on a {dim}-dimensional chart")]
    InvalidDegree { op: &'static str, degree: usize, dim: usize },

    #[error("point {point:?} lies outside the chart domain (axis {axis})")]
    OutOfDomain { point: Vec<f64>, axis: String },

    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("grid too large: {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: usize, cap: usize },

    #[error("degenerate structure at {point:?}: {reason}")]
    Degenerate { point: Vec<f64>, reason: String },

    #[error("rank deficient system at {point:?} (sigma_min/sigma_max = {ratio:e})")]
    RankDeficient { point: Vec<f64>, ratio: f64 },

    #[error("verification failed: {0}")]
    NotCertified(String),

    #[error("input does not match the standard model (max deviation {deviation:e} at {point:?})")]
    ModelMismatch { deviation: f64, point: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
