use thiserror::Error;

/// Errors produced by graph construction, the numerical kernels and the samplers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: {components} connected components")]
    DisconnectedGraph { components: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("node index {index} out of range for graph with {nodes} nodes")]
    NodeOutOfRange { index: usize, nodes: usize },

    #[error("invalid edge weights: {0}")]
    InvalidWeights(String),

    #[error("numerical rank deficiency: {zero_eigenvalues} eigenvalues below cutoff (expected 1)")]
    NumericalRankDeficiency { zero_eigenvalues: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("degenerate distance matrix: maximum distance is zero")]
    DegenerateDistance,

    #[error("conjugate update unavailable: nugget is {psi}, conjugacy requires zero nugget")]
    ConjugacyUnavailable { psi: f64 },

    #[error("chain too short: {len} draws, need at least {min}")]
    ChainTooShort { len: usize, min: usize },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by malformed input files rather than by the model.
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
