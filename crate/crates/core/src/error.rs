use std::fmt;

use thiserror::Error;

/// Where a formula parse went wrong. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownSymbol(String),
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownSymbol(sym) => write!(f, "unknown symbol `{sym}`"),
            ParseErrorKind::Arity {
                symbol,
                expected,
                found,
            } => write!(
                f,
                "arity mismatch: `{symbol}` takes {expected} argument(s), found {found}"
            ),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("events or random variables belong to different sample spaces")]
    SpaceMismatch,
    #[error("sample index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("arity mismatch: `{symbol}` takes {expected} argument(s), found {found}")]
    Arity {
        symbol: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unresolved constant `{0}`")]
    UnresolvedConstant(String),
    #[error("random variable `{0}` is not declared")]
    Undeclared(String),
    #[error("quantifier over an empty family")]
    EmptyFamily,
    #[error("formula is not open: {0}")]
    NotOpen(String),
    #[error("formula is not of exists-forall prefix form: {0}")]
    WrongPrefix(String),
    #[error("formula is not existential: {0}")]
    NotExistential(String),
    #[error("no filtration declared")]
    NoFiltration,
    #[error("filtration nesting violated: `{member}` is in level {level} but not in level {parent}")]
    NestingViolation {
        level: usize,
        parent: usize,
        member: String,
    },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("family size cap {cap} exceeded; partial members: {}", partial.join(", "))]
    ResourceLimit { cap: usize, partial: Vec<String> },
    #[error("value table has {found} entries, space has {expected} points")]
    TableLength { expected: usize, found: usize },
    #[error("type is empty")]
    EmptyType,
    #[error("wrong free variables in {formula}: expected {{{}}}, found {{{}}}", expected.join(", "), found.join(", "))]
    FreeVariables {
        formula: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}:{line}: {message}")]
    Scenario {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable code for machine consumption (CLI error lines).
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::SpaceMismatch => "space-mismatch",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::MalformedCircuit(_) => "malformed-circuit",
            Error::Arity { .. } => "arity",
            Error::UnboundVariable(_) => "unbound-variable",
            Error::UnresolvedConstant(_) => "unresolved-constant",
            Error::Undeclared(_) => "undeclared",
            Error::EmptyFamily => "empty-family",
            Error::NotOpen(_) => "not-open",
            Error::WrongPrefix(_) => "wrong-prefix",
            Error::NotExistential(_) => "not-existential",
            Error::NoFiltration => "no-filtration",
            Error::NestingViolation { .. } => "nesting-violation",
            Error::DuplicateName(_) => "duplicate-name",
            Error::ResourceLimit { .. } => "resource-limit",
            Error::TableLength { .. } => "table-length",
            Error::EmptyType => "empty-type",
            Error::FreeVariables { .. } => "free-variables",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Scenario { .. } => "scenario",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
