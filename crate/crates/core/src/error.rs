use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("environment has no points")]
    EmptyEnvironment,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: u32, second: u32 },
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
    #[error("region is not inside the region of interest")]
    OutsideWindow,
    #[error("invalid quad: {0}")]
    InvalidQuad(String),
    #[error("raster resolution {0} leaves a side without pixels")]
    ResolutionTooCoarse(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("fill spacing {spacing} exceeds region diameter {diameter}")]
    SpacingTooLarge { spacing: f64, diameter: f64 },
    #[error("fill spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("color count {colors} does not match point count {points}")]
    ColorCount { colors: usize, points: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("point {0} lies outside the dilated window")]
    PointOutsideWindow(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EventError {
    #[error("event is not monotone; use the Monte Carlo variant")]
    NotMonotone,
    #[error("{count} points in the set exceed the exhaustive limit {limit}")]
    TooManyPoints { count: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("estimator: {0}")]
    Estimator(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
