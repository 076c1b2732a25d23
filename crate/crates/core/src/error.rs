use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("network has no variables")]
    EmptyNetwork,
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{variable}` declares outcome `{outcome}` twice")]
    DuplicateOutcome { variable: String, outcome: String },
    #[error("variable `{0}` needs at least two outcomes")]
    TooFewOutcomes(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no outcome `{outcome}`")]
    UnknownOutcome { variable: String, outcome: String },
    #[error("no node model for variable `{0}`")]
    MissingNode(String),
    #[error("more than one node model for variable `{0}`")]
    DuplicateNode(String),
    #[error("node `{node}` references unknown parent `{parent}`")]
    DanglingParent { node: String, parent: String },
    #[error("node `{node}` lists parent `{parent}` more than once")]
    DuplicateParent { node: String, parent: String },
    #[error("cycle detected among {0:?}")]
    Cycle(Vec<String>),
    #[error("node `{node}`: expected {expected} CPT rows, found {found}")]
    RowCount {
        node: String,
        expected: usize,
        found: usize,
    },
    #[error("node `{node}` row {row}: expected {expected} entries, found {found}")]
    RowLength {
        node: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("node `{node}` row {row}: entry {value} is not a probability")]
    InvalidProbability {
        node: String,
        row: usize,
        value: f64,
    },
    #[error("node `{node}` row {row}: sums to {sum}, off by more than 1e-6")]
    RowSum { node: String, row: usize, sum: f64 },
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("variable `{0}` appears in both query and evidence")]
    QueryEvidenceOverlap(String),
    #[error("`{variable}` already observed as `{existing}`, cannot observe `{requested}`")]
    ConflictingEvidence {
        variable: String,
        existing: String,
        requested: String,
    },
    #[error("impossible evidence: {0}")]
    ImpossibleEvidence(String),
    #[error("evidence variable `{0}` lies outside the straw model scope")]
    OutsideScope(String),
    #[error("no evidence has been absorbed")]
    NoEvidence,
    #[error("scope has {configs} configurations, enumeration cap is {cap}")]
    ScopeTooLarge { configs: u128, cap: u128 },
    #[error("invalid straw model: {0}")]
    InvalidStraw(String),
    #[error("epsilon {0} outside [0, 1)")]
    InvalidEpsilon(f64),
    #[error("evidence has zero probability under both models")]
    ZeroEvidence,
    #[error("mixture weight {0} outside [0, 1]")]
    InvalidWeight(f64),
    #[error("outcome spaces differ: {0}")]
    MismatchedOutcomes(String),
    #[error("invalid rebuttal for `{node}`: {reason}")]
    InvalidRebuttal { node: String, reason: String },
    #[error("node `{0}` already has a rebuttal attached")]
    RebuttalExists(String),
    #[error("variable name `{0}` is already in use")]
    NameCollision(String),
    #[error("ratio floor must exceed 1, got {0}")]
    InvalidRatioFloor(f64),
    #[error("variable `{0}` is already observed")]
    AlreadyObserved(String),
    #[error("cannot condition on hypothesis `{variable}={outcome}`: {reason}")]
    DegenerateHypothesis {
        variable: String,
        outcome: String,
        reason: String,
    },
    #[error("networks do not share variables and outcomes: {0}")]
    MismatchedNetworks(String),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error("{0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}
