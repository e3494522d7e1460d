//! Past temporal logic, partially ordered automata, and fixed-precision
//! soft-attention transformers that recognize exactly the same languages.
//!
//! The crate is organised bottom-up:
//!
//! * [`fixedfloat`] — finite value sets with ±∞, rounding and softmax.
//! * [`logic`] — LTL\[P,F,S,U\] and two-variable past first-order logic.
//! * [`automata`] — DFAs, transition monoids and algebraic class tests.
//! * [`compilers`] — p.o. DFA → PTL → transformer recognizers and LMs.
//! * [`transformer`] — the fixed-precision inference engine.
//! * [`langsuite`] — benchmark languages and sample generators.
//! * [`verify`] — exhaustive equivalence checks against independent oracles.
//! * [`cli`] — the `ptlc` command-line front end.

pub mod alphabet;
pub mod automata;
pub mod cli;
pub mod compilers;
pub mod fixedfloat;
pub mod langsuite;
pub mod logic;
pub mod transformer;
pub mod verify;

pub use fixedfloat::{FVal, FloatError, FloatSystem};
