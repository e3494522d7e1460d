//! Exhaustive equivalence checks and the characterization sweep.

use ptlc::alphabet::Alphabet;
use ptlc::compilers::ptl_to_transformer;
use ptlc::langsuite::{reference_ptl, LanguageId};
use ptlc::logic::{parse_ltl, Mode};
use ptlc::verify::{
    coherence_sweep, equiv_language, FormulaMembership, LanguageMembership, SweepOptions, TransformerMembership,
    DEFAULT_BUDGET,
};
use ptlc::FloatSystem;

fn main() {
    let a = Alphabet::chars("ab").unwrap();
    let p_a = FormulaMembership::new(&parse_ltl("P a", &a).unwrap(), &a, Mode::AfterEnd).unwrap();
    let r = equiv_language(&p_a, &LanguageMembership(LanguageId::Last), &a, 3, DEFAULT_BUDGET).unwrap();
    println!("P a vs LAST: {}", r.to_json());

    let id = LanguageId::Pt2;
    let spec = ptl_to_transformer(&reference_ptl(id).unwrap(), &id.alphabet(), &FloatSystem::default_system()).unwrap();
    let r = equiv_language(&TransformerMembership(&spec), &LanguageMembership(id), &id.alphabet(), 7, DEFAULT_BUDGET)
        .unwrap();
    println!("\ncompiled {id} vs membership: {} strings, passed {}", r.checked, r.passed());

    let sweep = coherence_sweep(50, 5, 7, SweepOptions::default());
    println!("\nsweep: {}/{} coherent, {} R-trivial", sweep.coherent, sweep.n_dfas, sweep.r_trivial);
    let broken = coherence_sweep(50, 5, 7, SweepOptions { skip_minimization: true, ..SweepOptions::default() });
    println!("sweep without minimization: {} failures caught", broken.failures.len());
}
