use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into configuration problems (bad input, unsupported
/// parameters) and numeric failures (ill-conditioning, solver breakdown) so
/// front ends can map them to distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidVector(String),

    #[error("invalid sampler specification: {0}")]
    InvalidSampler(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate point set: {0}")]
    Degenerate(String),

    #[error("rank {rank} is below the requested dimension {requested}; attainable dimensions: {attainable:?}")]
    RankDeficient {
        rank: usize,
        requested: usize,
        attainable: Vec<usize>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("point lies outside the frame hull (distance {distance:e})")]
    OutsideHull { distance: f64 },

    #[error("ill-conditioned frame (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("unknown atom id {0}")]
    UnknownAtom(usize),

    #[error("malformed docword input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("document {0} has no tokens")]
    EmptyDocument(usize),

    #[error("non-simplex regime: {components} components in dimension {dim}")]
    NonSimplexRegime { components: usize, dim: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. } | Error::Numeric(_) | Error::OutsideHull { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
