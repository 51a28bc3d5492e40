use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sample size {n} for {what}")]
    InvalidSize { n: usize, what: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("estimator undefined: model {model} has an empty cell")]
    UndefinedEstimator { model: usize },

    #[error("quadrature did not reach tolerance on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("no model has every cell count >= {threshold}")]
    EmptyAdmissibleSet { threshold: usize },

    #[error("invalid number of folds V={v} for n={n}")]
    InvalidV { v: usize, n: usize },

    #[error("cell {cell} of model {model} is empty")]
    EmptyCell { model: usize, cell: usize },

    #[error("training fit undefined: block {block} empties a cell of model {model}")]
    UndefinedTrainingFit { model: usize, block: usize },

    #[error("cell {cell} of model {model} holds {count} < 2 observations")]
    CellTooSmall { model: usize, cell: usize, count: usize },

    #[error("sample size {0} is odd; the paired variance estimator needs n even")]
    OddSampleSize(usize),

    #[error("no admissible model left to select from")]
    NoAdmissibleModel,

    #[error("unknown function id `{0}`")]
    UnknownFunction(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid selector `{spec}`: {reason}")]
    InvalidSelector { spec: String, reason: String },

    #[error("degenerate cell: count {count} with V={v} leaves no training point")]
    DegenerateCell { count: usize, v: usize },

    #[error("argument {0} outside the domain")]
    DomainError(f64),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
