use thiserror::Error;

use crate::formula::Var;
use crate::graph::GraphError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Structural(#[from] GraphError),
    #[error("box occurrences do not guard every cycle")]
    Unguarded,
    #[error("not modalised in {var}")]
    NotModalised { var: Var },
    #[error("equation system is not modalised (dependency cycle through {var})")]
    SystemNotModalised { var: Var },
    #[error("duplicate unknown {var}")]
    DuplicateUnknown { var: Var },
    #[error("substitution domains overlap at {var}")]
    Composition { var: Var },
    #[error("variable {var} already occurs in the formula")]
    Occurs { var: Var },
    #[error("formula is cyclic")]
    Cyclic,
    #[error("model error: {0}")]
    Model(String),
    #[error("local translation fails at vertex {vertex}: {detail}")]
    Certification { vertex: usize, detail: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("format error at {path}: {msg}")]
    Format { path: String, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
