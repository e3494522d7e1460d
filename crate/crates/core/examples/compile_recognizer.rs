//! Compile a PTL formula to a transformer and watch attention vanish.

use ptlc::alphabet::Alphabet;
use ptlc::compilers::{find_dim, ptl_to_transformer};
use ptlc::logic::parse_ltl;
use ptlc::transformer::{accept, forward_syms};
use ptlc::FloatSystem;

fn main() {
    let a = Alphabet::chars("ab").unwrap();
    let phi = parse_ltl("P (a & P b)", &a).unwrap();
    let spec = ptl_to_transformer(&phi, &a, &FloatSystem::default_system()).unwrap();
    println!("{phi}: d_model {}, {} layers", spec.d_model, spec.layers.len());
    for s in ["ba", "ab", "bba", "aab"] {
        println!("  {s}: {}", if accept(&spec, &a.parse_word(s).unwrap()).unwrap() { "accept" } else { "reject" });
    }

    // with N_max = 1 only one earlier position can receive attention; the
    // compiled gadget repairs the defective simulation
    let sys = FloatSystem::fixed_grid(1.0, 64.0).unwrap();
    let spec = ptl_to_transformer(&parse_ltl("P a", &a).unwrap(), &a, &sys).unwrap();
    let w = a.parse_word("ababa").unwrap();
    let trace = forward_syms(&spec, &w).unwrap();
    let last = trace.sublayers.len() - 1;
    println!("\nP a on ababa, integer grid:");
    for label in ["a", "d2'(P a)", "d2(P a)", "d3'(P a)", "P a"] {
        let d = find_dim(&spec, label).unwrap();
        let row: Vec<String> = (1..=w.len()).map(|n| sys.format(trace.column(last, n)[d])).collect();
        println!("  {label:>9}: {}", row.join(" "));
    }
}
