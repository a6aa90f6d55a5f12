use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("hamiltonian is not hermitian (max deviation {0:e})")]
    NonHermitianHamiltonian(f64),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("time grid must be nonnegative and increasing")]
    NonMonotoneGrid,

    #[error("time grid node {node} is not a multiple of the step {dt}")]
    IncommensurateGrid { node: f64, dt: f64 },

    #[error("step size must be positive (got {0})")]
    NonPositiveStep(f64),

    #[error("expected {expected} noise increments, got {found}")]
    IncrementCount { expected: usize, found: usize },

    #[error("state norm left the representable range (squared norm {0:e})")]
    NormOutOfRange(f64),

    #[error("jump probability per step {0} exceeds 0.1; reduce dt")]
    JumpProbabilityTooLarge(f64),

    #[error("scalar product |<phi|psi>| = {0:e} fell below the floor")]
    ScalarProductCollapse(f64),

    #[error("steady state is not unique (null space dimension {0})")]
    DegenerateSteadyState(usize),

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("ensemble needs at least {required} samples, got {found}")]
    TooFewSamples { required: usize, found: usize },

    #[error("reference series has zero norm")]
    ZeroReference,

    #[error("{} trajectories failed; first: #{} {}", .0.len(), .0[0].0, .0[0].1)]
    TrajectoryFailures(Vec<(usize, Error)>),

    #[error("unknown unraveling '{0}'")]
    UnknownUnraveling(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
