//! Fixed-precision transformer inference: one-hot-free embedding lookup,
//! masked single-head attention (soft, average-hard or unique-hard),
//! ReLU feedforward, optional layer norm, classifier and LM heads.

mod engine;
mod spec;

use thiserror::Error;

use crate::alphabet::AlphabetError;
use crate::fixedfloat::FloatError;

pub use engine::{
    accept, apply_ffn, attention_weights, classifier_score, forward, forward_syms, lm_next_distribution,
    lm_next_distribution_syms, lm_string_probability, representation_concat, ActivationTrace, NextDistribution, Run,
};
pub use spec::{
    AttentionMode, DimInfo, DimKind, Head, HeadFile, Layer, LayerFile, LnFile, LnMode, Masking, Matrix, MatrixFile,
    SpecFile, TransformerSpec, EOS, UNK,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformerError {
    #[error("arithmetic failure at layer {layer}, position {position}, dim {dim}: {source}")]
    Arithmetic { layer: String, position: usize, dim: usize, source: FloatError },
    #[error("malformed spec: {0}")]
    Shape(String),
    #[error("cannot parse spec: {0}")]
    Parse(String),
    #[error("spec has a {found} head, operation needs a {needed} head")]
    HeadMismatch { found: &'static str, needed: &'static str },
    #[error("position {0} outside 1..={1}")]
    Position(usize, usize),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}
