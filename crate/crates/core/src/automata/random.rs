//! Random DFA generators for sweeps and property tests.

use rand::Rng;

use crate::alphabet::Alphabet;

use super::dfa::Dfa;

/// Alphabet `{a, b, c, …}` of the first `k` letters.
pub fn letters(k: usize) -> Alphabet {
    Alphabet::new((0..k).map(|i| ((b'a' + i as u8) as char).to_string())).expect("valid letter alphabet")
}

/// DFA with `1..=max_states` states over `1..=max_symbols` letters; each
/// transition is uniform over the states and the sink, each state is final
/// with probability 1/2.
pub fn random_dfa<R: Rng>(rng: &mut R, max_states: usize, max_symbols: usize) -> Dfa {
    let n = rng.gen_range(1..=max_states.max(1));
    let k = rng.gen_range(1..=max_symbols.max(1));
    let delta = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| {
                    let t = rng.gen_range(0..=n);
                    (t < n).then_some(t)
                })
                .collect()
        })
        .collect();
    let finals = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    Dfa::from_table(letters(k), 0, finals, delta)
}

/// Like [`random_dfa`], but every transition from `q_i` targets some
/// `q_j` with `j ≥ i` or the sink, so the result is partially ordered.
pub fn random_po_dfa<R: Rng>(rng: &mut R, max_states: usize, max_symbols: usize) -> Dfa {
    let n = rng.gen_range(1..=max_states.max(1));
    let k = rng.gen_range(1..=max_symbols.max(1));
    let delta = (0..n)
        .map(|i| {
            (0..k)
                .map(|_| {
                    let t = rng.gen_range(i..=n);
                    (t < n).then_some(t)
                })
                .collect()
        })
        .collect();
    let finals = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    Dfa::from_table(letters(k), 0, finals, delta)
}

/// Even mix of [`random_dfa`] and [`random_po_dfa`], so sweeps see both
/// outcomes of the partial-order test often.
pub fn random_mixed_dfa<R: Rng>(rng: &mut R, max_states: usize, max_symbols: usize) -> Dfa {
    if rng.gen_bool(0.5) {
        random_dfa(rng, max_states, max_symbols)
    } else {
        random_po_dfa(rng, max_states, max_symbols)
    }
}
