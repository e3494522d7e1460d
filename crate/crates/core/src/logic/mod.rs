//! Temporal and first-order logics over finite strings.
//!
//! [`Ltl`] covers LTL\[P,F,S,U\]; PTL is the fragment whose only temporal
//! operator is `P` ([`Ltl::is_ptl`]). [`Pfo`] is two-variable first-order
//! logic with past-bounded quantifiers. Positions of a string `w` are
//! `1..=|w|`; position `|w| + 1` (and `0` for future formulas) lies outside.

mod ltl;
mod parse;
mod pfo;
pub mod random;

use thiserror::Error;

pub use ltl::{eval_ltl, satisfies_ltl, Ltl, LtlDag, Mode, Node};
pub use parse::{parse_ltl, parse_pfo};
pub use pfo::{
    eval_pfo, is_pfo, language_sentence, pfo_sentence_to_ptl, pfo_to_ptl, ptl_to_pfo, threshold_exists,
    threshold_exists_capped, Pfo, Threshold, Var, K_MAX,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("position {n} out of range for a string of length {len}")]
    PositionOutOfRange { n: usize, len: usize },
    #[error("formula is not in PTL")]
    NotPtl,
    #[error("not in the past fragment: {0}")]
    NotPastFragment(String),
    #[error("free variable {0} is unassigned")]
    UnassignedVariable(String),
    #[error("threshold {k} outside 1..={cap}")]
    ThresholdCap { k: usize, cap: usize },
}
