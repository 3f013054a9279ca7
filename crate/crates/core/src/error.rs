use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A step produced a non-finite state.
    #[error("integration failure: non-finite state at time index {index}")]
    IntegrationFailure { index: usize },

    #[error("time index {index} outside [{n0}, {n_final}]")]
    IndexOutOfRange {
        index: usize,
        n0: usize,
        n_final: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("model `{model}` requires parameter `{key}`")]
    MissingParameter { model: String, key: String },

    /// A survivor never crossed the current level; the caller broke the
    /// precondition `path_score > level`.
    #[error("no state of the path has a score above level {level}")]
    NoCrossing { level: f64 },

    #[error("AMS did not stop within {limit} iterations")]
    IterationLimit { limit: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{} realization(s) failed; first: #{} ({})", .0.len(), .0[0].0, .0[0].1)]
    Realizations(Vec<(usize, Error)>),
}
