use thiserror::Error;

/// Errors raised by construction, geometry and correlation computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("stage {stage}: {inequality} violated")]
    SpacerBound { stage: usize, inequality: String },

    #[error("invalid stage {stage}: {reason}")]
    InvalidStage { stage: usize, reason: String },

    #[error("requested {requested} stages but the generator only provides {available}")]
    DepthExceeded { requested: usize, available: usize },

    #[error("built prefix too shallow: deepest column tried {deepest}, {detail}")]
    PrefixTooShallow { deepest: usize, detail: String },

    #[error("size budget exceeded: need {required} elements, budget {budget}")]
    SizeBudget { required: String, budget: u64 },

    #[error("pair budget exceeded: need {required} pairs, budget {budget}")]
    PairBudget { required: String, budget: u64 },

    #[error("enumeration cap exceeded: span {span} > cap {cap}")]
    EnumerationCap { span: usize, cap: usize },

    #[error("level out of range: {0}")]
    InvalidLevel(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("shift {k} outside simulable range (max {max}) at column {column}")]
    OracleRange { k: String, max: String, column: usize },

    #[error("search exhausted in phase {phase} at m = {m_cap}: best value {best}")]
    SearchExhausted { phase: usize, m_cap: usize, best: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("cache i/o: {0}")]
    Cache(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
