use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point at radius {radius} lies inside the exclusion radius {exclusion}")]
    InsideExclusion { radius: f64, exclusion: f64 },

    #[error("invalid metric parameters: {0}")]
    InvalidMetric(String),

    #[error("band limit {0} is below the minimum of {1}")]
    BandLimitTooSmall(usize, usize),

    #[error("field length {got} does not match grid size {expected}")]
    GridMismatch { expected: usize, got: usize },

    #[error("Mobius parameter |b| = {0} must lie in the open unit ball")]
    MobiusOutsideBall(f64),

    #[error("degenerate induced metric at node {0}")]
    DegenerateMetric(usize),

    #[error("immersion is not a valid embedding: {0}")]
    InvalidImmersion(String),

    #[error("mean curvature is not positive at node {0}")]
    NonConvex(usize),

    #[error("Gauss curvature is not positive at node {0}")]
    NonPositiveCurvature(usize),

    #[error("curvature deviation {deviation} exceeds the perturbative threshold {threshold}")]
    RegimeViolation { deviation: f64, threshold: f64 },

    #[error("{stage} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("metric profile is not embeddable as a surface of revolution at theta = {0}")]
    NotRevolutionEmbeddable(f64),

    #[error("embedded image intersects itself or fails to be star-shaped")]
    SelfIntersection,

    #[error("series cannot be fitted: {0}")]
    NotFittable(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
