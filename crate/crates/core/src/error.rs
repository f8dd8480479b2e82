use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("beta must lie strictly between 0 and 1, got {0}")]
    InvalidBeta(f64),
    #[error("dimension must be between 1 and {max}, got {k}")]
    InvalidDimension { k: usize, max: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("root solver failed: {0}")]
    SolverFailure(String),

    #[error("invalid seeds: {0}")]
    InvalidSeeds(String),
    #[error("term {0} is zero, ratio undefined")]
    ZeroDenominator(usize),
    #[error("successive ratios did not settle within {max_terms} terms")]
    NotConverged { max_terms: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("degenerate boundary intersection: {0}")]
    DegenerateIntersection(String),
    #[error("no physical excision: beta {beta} is not below the threshold {threshold} for k = {k}")]
    NotPhysical { k: usize, beta: f64, threshold: f64 },
    #[error("point is not on the shape boundary: {0}")]
    NotOnBoundary(String),
    #[error("invalid chord: {0}")]
    InvalidChord(String),
    #[error("cavity is not strictly smaller than the body")]
    DegenerateCavity,

    #[error("at least {min} samples are required, got {n}")]
    TooFewSamples { n: u64, min: u64 },
    #[error("no samples landed in the region")]
    NoAcceptedSamples,
}
