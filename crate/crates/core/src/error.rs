use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cyclic grammar: {}", fmt_cycle(.0))]
    CyclicGrammar(Vec<u32>),
    #[error("dangling reference in rule {var}: {what}")]
    DanglingReference { var: u32, what: String },
    #[error("string length does not fit in 63 bits")]
    LengthOverflow,
    #[error("path count does not fit in 63 bits")]
    CountOverflow,
    #[error("expansion longer than the cap of {0}")]
    CapExceeded(u64),
    #[error("grammar derives the empty string")]
    EmptyString,
    #[error("empty input")]
    EmptyInput,
    #[error("letter {0} has weight zero")]
    ZeroWeight(usize),
    #[error("total weight does not fit in 63 bits")]
    WeightOverflow,
    #[error("invalid dag: {0}")]
    InvalidDag(String),
    #[error("position {pos} outside 1..={len}")]
    OutOfRange { pos: u64, len: u64 },
    #[error("unknown terminal {0}")]
    UnknownTerminal(u32),
    #[error("no occurrence found")]
    NotFound,
    #[error("occurrence counts were not built for terminal {0}")]
    CountsNotBuilt(u32),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("base mismatch: {0}")]
    BaseMismatch(String),
    #[error("forest is empty")]
    EmptyForest,
    #[error("evaluation failed: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

fn fmt_cycle(c: &[u32]) -> String {
    c.iter().map(|v| format!("v{v}")).collect::<Vec<_>>().join(" -> ")
}

pub type Result<T> = std::result::Result<T, Error>;
