use thiserror::Error;

use crate::annotated_model::sexpr::Pos;

/// Problems found while reading annotated PDDL.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: undeclared predicate `{name}`")]
    UndeclaredPredicate { pos: Pos, name: String },
    #[error("{pos}: undeclared type `{name}`")]
    UndeclaredType { pos: Pos, name: String },
    #[error("{pos}: unknown object `{name}`")]
    UnknownObject { pos: Pos, name: String },
    #[error("{pos}: `{predicate}` expects {expected} argument(s), got {found}")]
    Arity {
        pos: Pos,
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: `{name}` is not a declared parameter")]
    UnknownParameter { pos: Pos, name: String },
    #[error("{pos}: type mismatch for `{arg}` in `{predicate}`: `{found}` is not a `{expected}`")]
    TypeMismatch {
        pos: Pos,
        predicate: String,
        arg: String,
        expected: String,
        found: String,
    },
    #[error("{pos}: non-ground atom `{atom}`")]
    NonGround { pos: Pos, atom: String },
    #[error("action `{action}`: atom {atom} is both {first} and {second}")]
    Overlap {
        action: String,
        atom: String,
        first: &'static str,
        second: &'static str,
    },
    #[error("{pos}: negative preconditions are not supported")]
    NegativePrecondition { pos: Pos },
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: &'static str, name: String },
}

impl ParseError {
    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    pub fn pos(&self) -> Option<Pos> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UndeclaredPredicate { pos, .. }
            | ParseError::UndeclaredType { pos, .. }
            | ParseError::UnknownObject { pos, .. }
            | ParseError::Arity { pos, .. }
            | ParseError::UnknownParameter { pos, .. }
            | ParseError::TypeMismatch { pos, .. }
            | ParseError::NonGround { pos, .. }
            | ParseError::NegativePrecondition { pos } => Some(*pos),
            ParseError::Overlap { .. } | ParseError::Duplicate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("selection does not cover condition {0}")]
    PartialSelection(String),
    #[error("unknown possible condition {0}")]
    UnknownCondition(String),
    #[error("action {action} is not applicable: missing {missing}")]
    Inapplicable { action: String, missing: String },
    #[error("search budget of {0} expanded nodes exceeded")]
    BudgetExceeded(usize),
    #[error("base task is unsolvable")]
    UnsolvableBase,
    #[error("action {0} has no add effects to use as a landmark goal")]
    EmptyAddSet(String),
    #[error("unknown fact {0}")]
    UnknownFact(String),
    #[error("brute-force check needs 2^{0} models, above the 2^6 limit")]
    ScaleExceeded(usize),
    #[error("answer {answer} is not legal for a {kind} query")]
    IllegalAnswer { answer: String, kind: &'static str },
    #[error("oracle gave an answer outside the inference table of query {query}: {detail}")]
    InconsistentOracle { query: usize, detail: String },
    #[error("conflicting assignment for {0}")]
    ConflictingAssignment(String),
    #[error("session aborted: {0}")]
    Aborted(String),
    #[error("{0}")]
    Mutation(String),
    #[error("recovery failed for seed {seed}: {detail}")]
    RecoveryFailed { seed: u64, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
