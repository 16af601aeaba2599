use std::path::PathBuf;

use thiserror::Error;

use crate::pddl::Literal;

/// A PDDL or plan-file failure anchored at a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(pos: crate::pddl::sexpr::Pos, kind: ParseErrorKind) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unsupported requirement {0}")]
    UnsupportedRequirement(String),
    #[error("{construct} requires {requirement}")]
    MissingRequirement {
        construct: String,
        requirement: &'static str,
    },
    #[error("unsupported goal form: {0}")]
    UnsupportedGoal(String),
    #[error("unsupported construct {0}")]
    Unsupported(String),
    #[error("undeclared type {0}")]
    UndeclaredType(String),
    #[error("undeclared predicate {0}")]
    UndeclaredPredicate(String),
    #[error("undeclared variable {0}")]
    UndeclaredVariable(String),
    #[error("duplicate {what} {name}")]
    Duplicate { what: &'static str, name: String },
    #[error("predicate {name} expects {expected} arguments, got {found}")]
    PredicateArity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("problem targets domain {found}, but the loaded domain is {expected}")]
    DomainMismatch { expected: String, found: String },
    #[error(transparent)]
    Ground(#[from] GroundError),
}

/// Failure to instantiate a plan step against its action schema.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("action {name} expects {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown constant {0}")]
    UnknownConstant(String),
    #[error("type mismatch: {object} has type {actual}, expected {expected}")]
    TypeMismatch {
        object: String,
        actual: String,
        expected: String,
    },
    #[error("static equality violated: {0}")]
    StaticEquality(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("precondition {0} unsatisfied")]
    PreconditionUnsatisfied(Literal),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("step {step}: {source}")]
    Ground { step: usize, source: GroundError },
    #[error("step {step}: {source}")]
    Apply { step: usize, source: ApplyError },
    #[error("plan is not valid: {0}")]
    InvalidPlan(String),
    #[error("plan {label}: {source}")]
    Plan {
        label: String,
        #[source]
        source: Box<Error>,
    },
    #[error("aggregate weights must be finite, non-negative and not all zero")]
    InvalidWeights,
    #[error("at least {needed} plans are required, got {found}")]
    TooFewPlans { needed: usize, found: usize },
    #[error("selection size {k} out of range 1..={n}")]
    SelectionSize { k: usize, n: usize },
    #[error("unknown metric {0}")]
    UnknownMetric(String),
    #[error("duplicate plan label {0}")]
    DuplicateLabel(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn in_plan(self, label: &str) -> Self {
        Error::Plan {
            label: label.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
