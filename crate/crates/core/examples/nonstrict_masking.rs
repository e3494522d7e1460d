//! Non-strict masking cannot tell the first two positions of `bb` apart;
//! strict masking can.

use ptlc::alphabet::Alphabet;
use ptlc::compilers::ptl_to_transformer;
use ptlc::langsuite::{reference_ptl, LanguageId};
use ptlc::transformer::{accept, AttentionMode, Masking};
use ptlc::verify::{nonstrict_collapse_check, random_spec, separates_first_positions};
use ptlc::FloatSystem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let sys = FloatSystem::default_system();
    let a = Alphabet::chars("ab").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..5 {
        let mut spec = random_spec(&mut rng, &sys, &a, 4, 2, Masking::NonStrict);
        let separates = separates_first_positions(&spec, 1).unwrap();
        let soft = nonstrict_collapse_check(&spec, 6);
        spec.attention_mode = AttentionMode::UniqueHard;
        let hard = nonstrict_collapse_check(&spec, 6);
        let first = soft.violations.first().map(|v| format!("first break at {} position {}", v.layer, v.position));
        println!(
            "spec {i}: separates b|b {separates}; soft collapse {} ({}); unique-hard collapse {}",
            soft.passed(),
            first.unwrap_or_else(|| "none".into()),
            hard.passed()
        );
    }

    let id = LanguageId::BbStar;
    let al = id.alphabet();
    let bb = ptl_to_transformer(&reference_ptl(id).unwrap(), &al, &sys).unwrap();
    println!("\nstrict bbΣ* recognizer separates b|b: {}", separates_first_positions(&bb, 1).unwrap());
    for s in ["bb", "bba", "bab", "b"] {
        println!("  {s}: {}", accept(&bb, &al.parse_word(s).unwrap()).unwrap());
    }
}
