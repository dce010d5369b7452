use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures while reading an instance file. Each malformed-input class has
/// its own variant so callers (and the CLI exit codes) can tell them apart.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: cannot parse number {token:?}")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    WrongCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error("invalid dimensions {0}x{1}")]
    BadDimensions(usize, usize),
    #[error("Xi must be a contiguous range 'lo hi' with lo <= hi: {0}")]
    NonContiguousXi(String),
    #[error("prev outside Xi at ({row}, {col}): {value}")]
    PrevOutsideXi { row: usize, col: usize, value: i64 },
    #[error("negative capacity delta: {0}")]
    NegativeDelta(String),
    #[error("alpha must be positive: {0}")]
    NonPositiveAlpha(String),
    #[error("trailing content after instance data at line {0}")]
    TrailingContent(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("operation requires a two-valued Xi, instance has Xi = {lo}..={hi}")]
    NonBinary { lo: i64, hi: i64 },
    #[error("infeasible step: {0}")]
    InfeasibleStep(String),
    #[error("too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("unknown variable reference: {0}")]
    UnknownVariable(String),
    #[error("component G has mixed previous controls")]
    MixedComponent,
    #[error("solution is already integral")]
    IntegralSolution,
    #[error("lp solve failed: {0}")]
    Lp(String),
    #[error("subproblem failed at outer iteration {iteration}, inner step {step}: {source}")]
    Subproblem {
        iteration: usize,
        step: usize,
        source: Box<Error>,
    },
}
