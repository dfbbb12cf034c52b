use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid fidelity ladder: {0}")]
    InvalidLadder(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the box at coordinate {index}")]
    PointOutsideBounds { index: usize },

    #[error("invalid sizing factor {0}, expected a value in [0, 1]")]
    InvalidSizingFactor(f64),

    #[error("invalid synthetic problem: {0}")]
    InvalidSpec(String),

    #[error(
        "none of the {samples} Latin hypercube points satisfies the a-priori constraints; \
         increase rho or n_H"
    )]
    EmptyAprioriSample { samples: usize },

    #[error("no grid point of the region satisfies the a-priori constraints")]
    EmptyRegion,

    #[error("invalid assignment instance: {0}")]
    InvalidInstance(String),

    #[error(
        "assignment search space holds {candidates} candidates (cap {cap}); \
         use a larger epsilon or a coarser fidelity ladder"
    )]
    SearchSpaceTooLarge { candidates: u128, cap: u128 },

    #[error("brute-force enumeration of {candidates} candidates exceeds the guard of {cap}")]
    BruteForceTooLarge { candidates: u128, cap: u128 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
