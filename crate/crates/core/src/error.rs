use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time {t} lies within 1e-9 of a node of the {n}-point grid; give it an exact tag")]
    BoundaryAmbiguity { t: f64, n: u64 },
    #[error("time {0} is outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("factors refer to different node sets")]
    MixedNodeSets,
    #[error("conditioning is only defined on path factors, found {0}")]
    UnsupportedFactor(String),
    #[error("Wick degree {0} exceeds the supported maximum of 170")]
    DegreeTooLarge(u32),
    #[error("quadrature did not converge: order estimates {coarse} and {fine} differ beyond tolerance")]
    QuadratureDivergence { coarse: f64, fine: f64 },
    #[error("only {found} records found, {wanted} requested")]
    InsufficientRange { found: usize, wanted: usize },
    #[error("time has no exact rational tag")]
    NoExactTag,
    #[error("rate fit needs at least 3 points with positive values")]
    DegeneratePoints,
    #[error("Gram matrix is not positive semidefinite (smallest eigenvalue {0})")]
    NonPsd(f64),
    #[error("factor missing from sample batch")]
    MissingFactor,
    #[error("invalid integrand: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
