//! DFAs with an implicit rejecting sink, transition monoids and the
//! algebraic class tests (R-trivial, aperiodic, DA), plus monomials.

mod dfa;
mod monoid;
mod monomial;
pub mod random;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::alphabet::AlphabetError;

pub use dfa::{Dfa, DfaFile, SINK_NAME};
pub use monoid::{Monoid, MONOID_CAP};
pub use monomial::{
    polynomial_accepts, polynomial_to_dfa, polynomial_to_dfa_capped, Monomial, MonomialFile, STATE_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("symbol index {0} outside the alphabet")]
    SymbolOutOfRange(usize),
    #[error("monoid exceeds the cap of {0} elements")]
    MonoidTooLarge(usize),
    #[error("subset construction exceeds the cap of {0} states")]
    StateBlowup(usize),
    #[error("inconsistent classification: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}

/// Transition monoid of the minimal complete DFA.
pub fn transition_monoid(d: &Dfa) -> Result<Monoid, AutomataError> {
    Monoid::of_dfa(d)
}

/// Position of a language in the hierarchy
/// regular ⊇ star-free ⊇ unambiguous polynomials ⊇ left-deterministic polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub regular: bool,
    pub star_free: bool,
    pub unambiguous_poly: bool,
    pub left_det_poly: bool,
    pub partially_ordered: bool,
    pub monoid_size: usize,
    /// Shortest words exhibiting why a class test failed.
    pub witnesses: BTreeMap<String, Vec<String>>,
}

impl Classification {
    /// Name of the smallest class containing the language.
    pub fn smallest_class(&self) -> &'static str {
        if self.left_det_poly {
            "left-deterministic polynomial"
        } else if self.unambiguous_poly {
            "unambiguous polynomial"
        } else if self.star_free {
            "star-free"
        } else {
            "regular"
        }
    }
}

/// Classifies `L(d)` through its transition monoid. R-triviality is checked
/// against partial order of the minimal DFA; disagreement is an error.
pub fn classify_language(d: &Dfa) -> Result<Classification, AutomataError> {
    let min = d.minimize();
    let m = Monoid::of_dfa(d)?;
    let word = |e: usize| -> String { min.alphabet().format_word(m.witness(e)) };
    let mut witnesses = BTreeMap::new();

    let r_trivial = m.r_trivial_witness();
    let po = min.is_partially_ordered();
    if r_trivial.is_none() != po {
        return Err(AutomataError::Inconsistent(format!(
            "R-trivial = {}, partially ordered = {}",
            r_trivial.is_none(),
            po
        )));
    }
    if let Some((s, t)) = r_trivial {
        witnesses.insert("left_det_poly".into(), vec![word(s), word(t)]);
    }
    let aperiodic = m.aperiodicity_witness();
    if let Some(s) = aperiodic {
        witnesses.insert("star_free".into(), vec![word(s)]);
    }
    let da = m.da_witness();
    if let Some((e, y)) = da {
        witnesses.insert("unambiguous_poly".into(), vec![word(e), word(y)]);
    }
    let c = Classification {
        regular: true,
        star_free: aperiodic.is_none(),
        unambiguous_poly: da.is_none(),
        left_det_poly: r_trivial.is_none(),
        partially_ordered: po,
        monoid_size: m.len(),
        witnesses,
    };
    if (c.left_det_poly && !c.unambiguous_poly) || (c.unambiguous_poly && !c.star_free) {
        return Err(AutomataError::Inconsistent("class flags are not monotone".into()));
    }
    Ok(c)
}
