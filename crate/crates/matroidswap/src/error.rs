use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance must have at least one agent")]
    NoAgents,
    #[error("duplicate good id `{0}`")]
    DuplicateGood(String),
    #[error("duplicate agent id `{0}`")]
    DuplicateAgent(String),
    #[error("priority must be a permutation of ranks 1..={0}")]
    InvalidPriority(usize),
    #[error("unknown good `{0}`")]
    UnknownGood(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("good set universe {got} does not match the oracle's {expected} goods")]
    UniverseMismatch { expected: usize, got: usize },
    #[error("good g{0} is already in the bundle")]
    GoodAlreadyHeld(usize),
    #[error("explicit tables support at most {max} goods, got {got}")]
    ExplicitTooLarge { max: usize, got: usize },
    #[error("explicit table has no entry for subset mask {0:#b}")]
    MissingSubset(u64),
    #[error("partition parts are not pairwise disjoint")]
    OverlappingParts,
    #[error("utility vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("allocation is not clean: agent a{agent} values its bundle at {value}, size {size}")]
    NotClean { agent: usize, value: u64, size: usize },
    #[error("allocation is not a partition of the goods: {0}")]
    NotAPartition(String),
    #[error("stale transfer path: {0}")]
    StalePath(String),
    #[error("{0}")]
    Precondition(String),
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("no Lorenz dominating vector among clean allocations; best candidate {best:?} fails against {other:?} (implementation bug)")]
    LorenzExistenceViolated { best: Vec<u64>, other: Vec<u64> },
    #[error("invalid instance file: {0}")]
    Format(String),
    #[error("oracle for agent `{agent}` is not a matroid rank function: {detail}")]
    OracleInvalid { agent: String, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
