//! Where each benchmark language sits in the regular-language hierarchy.

use ptlc::automata::classify_language;
use ptlc::langsuite::{reference_dfa, LanguageId};

fn main() {
    println!(
        "{:<9} {:>7} {:>9} {:>9} {:>9} {:>7}  class",
        "language", "states", "star-free", "unamb.", "left-det", "monoid"
    );
    for id in LanguageId::ALL.into_iter().filter(|id| id.is_regular()) {
        let d = reference_dfa(id).unwrap();
        let c = classify_language(&d).unwrap();
        println!(
            "{:<9} {:>7} {:>9} {:>9} {:>9} {:>7}  {}",
            id.name(),
            d.num_states(),
            c.star_free,
            c.unambiguous_poly,
            c.left_det_poly,
            c.monoid_size,
            c.smallest_class()
        );
        for (test, words) in &c.witnesses {
            println!("{:>12} fails {test}: {words:?}", "");
        }
    }
}
