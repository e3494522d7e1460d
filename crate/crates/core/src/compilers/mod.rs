//! Constructive translations: partially ordered DFA → PTL state formulas,
//! PTL → fixed-precision transformer recognizer, and partially ordered
//! DFA → transformer language model.

mod lm;
mod po2ptl;
mod ptl2tf;

use thiserror::Error;

use crate::automata::AutomataError;
use crate::fixedfloat::FloatError;
use crate::logic::LogicError;
use crate::transformer::TransformerError;

pub use lm::{dfa_lm_distribution, podfa_to_transformer_lm, support_at, LmDistribution};
pub use po2ptl::{podfa_to_ptl, state_formulas, StateFormulaSet};
pub use ptl2tf::{find_dim, gadget_constants, ptl_to_transformer, uniform_attention_values, GadgetConstants};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("the automaton is not partially ordered")]
    NotPartiallyOrdered,
    #[error("formula is not in PTL")]
    NotPtl,
    #[error("float system unsuitable: {0}")]
    Unsuitable(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Float(#[from] FloatError),
    #[error(transparent)]
    Transformer(#[from] TransformerError),
}
