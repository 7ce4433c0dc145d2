use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: conflicting judgments for ({topic}, {doc}): {first} vs {second}")]
    DuplicatePair {
        line: usize,
        topic: String,
        doc: String,
        first: String,
        second: String,
    },

    #[error("line {line}: document {doc} appears twice in topic {topic}")]
    DuplicateDoc { line: usize, topic: String, doc: String },

    #[error("line {line}: run tag {found:?} differs from {expected:?}")]
    InconsistentTag {
        line: usize,
        expected: String,
        found: String,
    },

    #[error("line {line}: record has neither a score nor a token")]
    MissingSignal { line: usize },

    #[error("line {line}: probability {prob} outside [0, 1]")]
    ProbOutOfRange { line: usize, prob: f64 },

    #[error("invalid identifier {0:?}: must be non-empty with no whitespace")]
    InvalidId(String),

    #[error("invalid score record: {0}")]
    InvalidRecord(String),

    #[error("({topic}, {doc}) has no generated token")]
    MissingToken { topic: String, doc: String },

    #[error("({topic}, {doc}) generated token {token:?} which the token map does not cover")]
    UnknownToken { topic: String, doc: String, token: String },

    #[error("({topic}, {doc}) has no score")]
    MissingScore { topic: String, doc: String },

    #[error("threshold must be finite, got {0}")]
    NonFiniteThreshold(f64),

    #[error("threshold grid is empty")]
    EmptyGrid,

    #[error("invalid threshold grid: {0}")]
    InvalidGrid(String),

    #[error("invalid token map: {0}")]
    InvalidTokenMap(String),

    #[error("no prediction for gold pair ({topic}, {doc})")]
    MissingPrediction { topic: String, doc: String },

    #[error("kappa is undefined: both raters assign a single class (expected agreement = 1)")]
    DegenerateMarginals,

    #[error("sweep objective is undefined at every grid point")]
    DegenerateObjective,

    #[error("sweep objective {0} needs a run set")]
    MissingRuns(String),

    #[error("transfer target {target} names source {source_id}, which has no sweep result")]
    MissingSource { target: String, source_id: String },

    #[error("confusion table is empty")]
    EmptyConfusion,

    #[error("kendall's tau is undefined: one ordering assigns every system the same value")]
    AllTied,

    #[error("orderings need at least 2 systems, got {0}")]
    TooFewSystems(usize),

    #[error("ordering lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("evaluations mix metrics {0} and {1}")]
    MetricMismatch(String, String),

    #[error("unknown metric {0:?} (expected map@K, mrr@K, ndcg@K, p@K, recall@K or judged@K)")]
    InvalidMetric(String),

    #[error("unknown judge {0:?}")]
    UnknownJudge(String),

    #[error("unknown system {0:?}")]
    UnknownSystem(String),

    #[error("invalid system catalog: {0}")]
    InvalidCatalog(String),

    #[error("qrels for {0:?} are empty")]
    EmptyQrels(String),

    #[error("run set is empty")]
    NoRuns,

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
