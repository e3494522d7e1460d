//! State formulas of a partially ordered DFA, checked against the machine.

use ptlc::compilers::podfa_to_ptl;
use ptlc::langsuite::{reference_dfa, LanguageId};
use ptlc::logic::Mode;
use ptlc::verify::{equiv_language, DfaMembership, FormulaMembership, DEFAULT_BUDGET};

fn main() {
    for id in [LanguageId::First, LanguageId::Ldp1] {
        let d = reference_dfa(id).unwrap();
        let set = podfa_to_ptl(&d).unwrap();
        println!("{id}: {} states", set.states.len());
        for (i, q) in set.states.iter().enumerate() {
            println!("  sigma[{q}] = {}", set.sigma[i]);
        }
        println!("  accept  = {}", set.acceptance);
        let phi = FormulaMembership::new(&set.acceptance, d.alphabet(), Mode::AfterEnd).unwrap();
        let r = equiv_language(&DfaMembership(&d), &phi, d.alphabet(), 7, DEFAULT_BUDGET).unwrap();
        println!("  agrees with the DFA on {} strings: {}\n", r.checked, r.passed());
    }
    let err = podfa_to_ptl(&reference_dfa(LanguageId::Parity).unwrap()).unwrap_err();
    println!("PARITY: {err}");
}
