use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("perturbation not applicable: {0}")]
    NotApplicable(String),

    #[error("seed `{seed_id}` has no paraphrase")]
    MissingParaphrase { seed_id: String },

    #[error("seed `{seed_id}` is missing field `{field}`")]
    MissingField { seed_id: String, field: &'static str },

    #[error("expected {expected} inputs, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("invalid NLI triple ({e}, {c}, {n}): {reason}")]
    InvalidTriple {
        e: f64,
        c: f64,
        n: f64,
        reason: &'static str,
    },

    #[error("pooling strategy {0} needs a backward triple")]
    MissingDirection(String),

    #[error("coverage gap: {} missing, {} unexpected (first missing: {:?})", missing.len(), extra.len(), missing.first())]
    CoverageGap {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("score batch is empty")]
    EmptyBatch,

    #[error("`{0}` has an empty score list")]
    EmptyList(String),

    #[error("partition `{0}` is empty")]
    EmptyPartition(&'static str),

    #[error("degenerate min-max range [{min}, {max}]")]
    DegenerateRange { min: f64, max: f64 },

    #[error("batch `{0}` is not min-max normalized")]
    NotNormalized(String),

    #[error("score batches share no instance ids")]
    EmptyIntersection,

    #[error("weight {0} is outside [0, 1]")]
    InvalidWeight(f64),

    #[error("instance ids differ between batches ({} only in first, {} only in second)", only_left.len(), only_right.len())]
    IdMismatch {
        only_left: Vec<String>,
        only_right: Vec<String>,
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("correlation undefined for a constant vector")]
    ConstantVector,

    #[error("kendall tau undefined: all values tied")]
    AllTied,

    #[error("join produced no pairs")]
    EmptyJoin,

    #[error("need at least 2 systems, got {0}")]
    TooFewSystems(usize),

    #[error("incomplete results grid: cell {dataset}/{nli_metric} lacks strategy {strategy}")]
    IncompleteGrid {
        dataset: String,
        nli_metric: String,
        strategy: String,
    },

    #[error("need at least 2 datasets, got {0}")]
    TooFewDatasets(usize),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("unknown scorer `{0}`")]
    UnknownScorer(String),

    #[error("scorer exited with {status}: {stderr_tail}")]
    ScorerFailed { status: String, stderr_tail: String },

    #[error("scorer timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("command template must contain {{in}} and {{out}}: `{0}`")]
    BadTemplate(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput(_) => "EmptyInput",
            Error::Unsupported(_) => "Unsupported",
            Error::NotApplicable(_) => "NotApplicable",
            Error::MissingParaphrase { .. } => "MissingParaphrase",
            Error::MissingField { .. } => "MissingField",
            Error::WrongArity { .. } => "WrongArity",
            Error::InvalidTriple { .. } => "InvalidTriple",
            Error::MissingDirection(_) => "MissingDirection",
            Error::CoverageGap { .. } => "CoverageGap",
            Error::EmptyBatch => "EmptyBatch",
            Error::EmptyList(_) => "EmptyList",
            Error::EmptyPartition(_) => "EmptyPartition",
            Error::DegenerateRange { .. } => "DegenerateRange",
            Error::NotNormalized(_) => "NotNormalized",
            Error::EmptyIntersection => "EmptyIntersection",
            Error::InvalidWeight(_) => "InvalidWeight",
            Error::IdMismatch { .. } => "IdMismatch",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::TooShort { .. } => "TooShort",
            Error::ConstantVector => "ConstantVector",
            Error::AllTied => "AllTied",
            Error::EmptyJoin => "EmptyJoin",
            Error::TooFewSystems(_) => "TooFewSystems",
            Error::IncompleteGrid { .. } => "IncompleteGrid",
            Error::TooFewDatasets(_) => "TooFewDatasets",
            Error::DuplicateId(_) => "DuplicateId",
            Error::UnknownScorer(_) => "UnknownScorer",
            Error::ScorerFailed { .. } => "ScorerFailed",
            Error::Timeout(_) => "Timeout",
            Error::BadTemplate(_) => "BadTemplate",
            Error::Parse { .. } => "ParseError",
            Error::Invalid(_) => "Invalid",
            Error::Io(_) => "IoError",
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.to_string(),
        }
    }
}
