use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n must be positive")]
    ZeroInput,

    #[error("{what} = {value} is outside the supported range (max {bound})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        bound: u64,
    },

    #[error("rank query at x = {x} exceeds the store limit {limit}")]
    RankOutOfRange { x: u64, limit: u64 },

    #[error("a = {a} and b = {b} must be coprime")]
    NotCoprime { a: u64, b: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "x = {x} needs at least {estimated_terms} terms, over the exact-enumeration cap {cap}"
    )]
    TermBudget {
        x: u64,
        estimated_terms: u128,
        cap: u128,
    },

    #[error("allocating {bytes} bytes for sieve limit {limit} failed")]
    OutOfMemory { limit: u64, bytes: usize },

    #[error("class {class} (mod {q}) is non-admissible but holds {count} twin pairs (first members {first}, {second})")]
    NonAdmissibleClassViolation {
        q: u64,
        class: u64,
        count: u64,
        first: u64,
        second: u64,
    },

    #[error("bound violated at n = {n}: {detail}")]
    BoundViolation { n: u64, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed sieve dump: {0}")]
    BadDump(String),
}
