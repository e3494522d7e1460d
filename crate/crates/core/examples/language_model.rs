//! A transformer language model compiled from a partially ordered DFA.

use ptlc::compilers::{dfa_lm_distribution, podfa_to_transformer_lm};
use ptlc::langsuite::{reference_dfa, LanguageId};
use ptlc::transformer::{lm_next_distribution_syms, lm_string_probability};
use ptlc::FloatSystem;

fn main() {
    let id = LanguageId::Ldp1;
    let d = reference_dfa(id).unwrap();
    let sys = FloatSystem::default_system();
    let lm = podfa_to_transformer_lm(&d, &sys).unwrap();
    let al = id.alphabet();
    println!("{id} LM: d_model {}, {} layers", lm.d_model, lm.layers.len());
    for prefix in ["", "b1", "b1 a", "b1 a b0", "b0"] {
        let w = al.parse_word(prefix).unwrap();
        let tf = lm_next_distribution_syms(&lm, &w).unwrap();
        let want = dfa_lm_distribution(&d, &w).unwrap();
        let shown: Vec<String> = tf
            .symbols
            .iter()
            .zip(&tf.probs)
            .filter(|(_, &p)| !sys.is_zero(p))
            .map(|(s, &p)| format!("{s}:{}", sys.format(p)))
            .collect();
        println!(
            "  after {:<9} transformer {:<28} dfa support {:?}",
            format!("{prefix:?}"),
            shown.join(" "),
            want.support()
        );
    }
    let w = al.parse_word("b1 a b0").unwrap();
    println!("  p(b1 a b0 EOS) = {}", sys.format(lm_string_probability(&lm, &w).unwrap()));
}
