//! Past temporal logic on finite strings and its two-variable first-order form.

use ptlc::alphabet::Alphabet;
use ptlc::logic::{eval_ltl, eval_pfo, language_sentence, parse_ltl, pfo_to_ptl, ptl_to_pfo, LtlDag, Mode, Var};

fn main() {
    let a = Alphabet::chars("ab").unwrap();
    let phi = parse_ltl("b & P (a & !P b)", &a).unwrap();
    let w = a.parse_word("aab").unwrap();

    println!("formula: {phi}");
    let rows = LtlDag::build(&phi, &a).unwrap().eval_root(&w);
    for (n, v) in rows.iter().enumerate() {
        println!("  position {n}: {v}");
    }
    println!("whole string (after end): {}", LtlDag::build(&phi, &a).unwrap().satisfies(&w, Mode::AfterEnd));
    println!(
        "P a on abb at position 3: {}",
        eval_ltl(&parse_ltl("P a", &a).unwrap(), &a, &a.parse_word("abb").unwrap(), 3).unwrap()
    );

    let fo = ptl_to_pfo(&phi).unwrap();
    println!("\nfirst-order form: {fo}");
    println!("  holds at x = 3: {}", eval_pfo(&fo, &a, &w, [Some(3), None]).unwrap());
    println!("back to PTL: {}", pfo_to_ptl(&fo, &a, Var::X).unwrap());

    let sentence = language_sentence(&parse_ltl("P (a & P b)", &a).unwrap()).unwrap();
    println!("\nsentence for P (a & P b): {sentence}");
    for s in ["ab", "ba", "bba"] {
        let v = eval_pfo(&sentence, &a, &a.parse_word(s).unwrap(), [None, None]).unwrap();
        println!("  {s}: {v}");
    }
}
