//! Random formula generation for sweeps and property tests.

use std::sync::Arc;

use rand::Rng;

use crate::alphabet::Alphabet;

use super::ltl::Ltl;

/// Random PTL formula with operator depth at most `max_depth`.
pub fn random_ptl<R: Rng>(rng: &mut R, alphabet: &Alphabet, max_depth: usize) -> Arc<Ltl> {
    gen(rng, alphabet, max_depth, 3, false)
}

/// Random LTL\[P,F,S,U\] formula with operator depth at most `max_depth`.
pub fn random_ltl<R: Rng>(rng: &mut R, alphabet: &Alphabet, max_depth: usize) -> Arc<Ltl> {
    gen(rng, alphabet, max_depth, 3, true)
}

fn gen<R: Rng>(rng: &mut R, alphabet: &Alphabet, depth: usize, boolean: usize, full: bool) -> Arc<Ltl> {
    let leaf = |rng: &mut R| -> Arc<Ltl> {
        match rng.gen_range(0..10) {
            0 => Ltl::tt(),
            1 => Ltl::ff(),
            _ => Ltl::atom(alphabet.name(rng.gen_range(0..alphabet.len()))),
        }
    };
    let temporal_ok = depth > 0;
    let bool_ok = boolean > 0;
    if !temporal_ok && !bool_ok {
        return leaf(rng);
    }
    let roll = rng.gen_range(0..10);
    if roll < 2 {
        return leaf(rng);
    }
    if temporal_ok && (roll >= 6 || !bool_ok) {
        let k = if full { rng.gen_range(0..4) } else { 0 };
        let sub = |rng: &mut R| gen(rng, alphabet, depth - 1, 3, full);
        return match k {
            0 => Ltl::past(sub(rng)),
            1 => Ltl::future(sub(rng)),
            2 => Ltl::since(sub(rng), sub(rng)),
            _ => Ltl::until(sub(rng), sub(rng)),
        };
    }
    if !bool_ok {
        return leaf(rng);
    }
    let sub = |rng: &mut R| gen(rng, alphabet, depth, boolean - 1, full);
    match rng.gen_range(0..3) {
        0 => Ltl::not(sub(rng)),
        1 => Ltl::and(sub(rng), sub(rng)),
        _ => Ltl::or(sub(rng), sub(rng)),
    }
}
