use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Sym};

use super::dfa::Dfa;
use super::AutomataError;

/// Cap on subset-construction states in [`polynomial_to_dfa`].
pub const STATE_CAP: usize = 100_000;

/// The language `Σ₀* a₁ Σ₁* ⋯ a_n Σ_n*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    loops: Vec<Vec<bool>>,
    letters: Vec<Sym>,
}

/// On-disk form: `{"loops": [["a","b"], …], "letters": ["a", …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonomialFile {
    pub loops: Vec<Vec<String>>,
    pub letters: Vec<String>,
}

impl Monomial {
    pub fn new(alphabet: &Alphabet, loops: &[Vec<Sym>], letters: &[Sym]) -> Result<Self, AutomataError> {
        if loops.len() != letters.len() + 1 {
            return Err(AutomataError::Invalid(format!(
                "a monomial with {} letters needs {} loop sets, got {}",
                letters.len(),
                letters.len() + 1,
                loops.len()
            )));
        }
        let k = alphabet.len();
        if let Some(&s) = loops.iter().flatten().chain(letters).find(|&&s| s >= k) {
            return Err(AutomataError::SymbolOutOfRange(s));
        }
        let loops = loops
            .iter()
            .map(|set| {
                let mut bits = vec![false; k];
                set.iter().for_each(|&s| bits[s] = true);
                bits
            })
            .collect();
        Ok(Monomial { loops, letters: letters.to_vec() })
    }

    pub fn from_file(f: &MonomialFile, alphabet: &Alphabet) -> Result<Self, AutomataError> {
        let loops = f
            .loops
            .iter()
            .map(|set| set.iter().map(|s| alphabet.require(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let letters = f.letters.iter().map(|s| alphabet.require(s)).collect::<Result<Vec<_>, _>>()?;
        Self::new(alphabet, &loops, &letters)
    }

    pub fn to_file(&self, alphabet: &Alphabet) -> MonomialFile {
        MonomialFile {
            loops: self
                .loops
                .iter()
                .map(|bits| (0..bits.len()).filter(|&s| bits[s]).map(|s| alphabet.name(s).to_string()).collect())
                .collect(),
            letters: self.letters.iter().map(|&s| alphabet.name(s).to_string()).collect(),
        }
    }

    /// Number of marked letters `n`.
    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Sym] {
        &self.letters
    }

    pub fn in_loop(&self, i: usize, s: Sym) -> bool {
        self.loops[i][s]
    }

    /// `a_k ∉ Σ_{k−1}` for every `k`.
    pub fn is_left_deterministic(&self) -> bool {
        self.letters.iter().enumerate().all(|(k, &a)| !self.loops[k][a])
    }

    /// `a_k ∉ Σ_k` for every `k`.
    pub fn is_right_deterministic(&self) -> bool {
        self.letters.iter().enumerate().all(|(k, &a)| !self.loops[k + 1][a])
    }

    /// NFA positions reachable after one more symbol.
    fn step(&self, set: &[bool], s: Sym) -> Vec<bool> {
        let n = self.letters.len();
        let mut next = vec![false; n + 1];
        for i in (0..=n).filter(|&i| set[i]) {
            if self.loops[i][s] {
                next[i] = true;
            }
            if i < n && self.letters[i] == s {
                next[i + 1] = true;
            }
        }
        next
    }

    /// Direct membership by scanning with the loop sets.
    pub fn accepts(&self, w: &[Sym]) -> bool {
        let n = self.letters.len();
        let mut set = vec![false; n + 1];
        set[0] = true;
        for &s in w {
            if s >= self.loops[0].len() {
                return false;
            }
            set = self.step(&set, s);
        }
        set[n]
    }
}

/// Membership in a finite union of monomials.
pub fn polynomial_accepts(p: &[Monomial], w: &[Sym]) -> bool {
    p.iter().any(|m| m.accepts(w))
}

/// Minimal DFA for the union of `p` via subset construction over the
/// position automata of the monomials.
pub fn polynomial_to_dfa(alphabet: &Alphabet, p: &[Monomial]) -> Result<Dfa, AutomataError> {
    polynomial_to_dfa_capped(alphabet, p, STATE_CAP)
}

pub fn polynomial_to_dfa_capped(alphabet: &Alphabet, p: &[Monomial], cap: usize) -> Result<Dfa, AutomataError> {
    let k = alphabet.len();
    if let Some(m) = p.iter().find(|m| m.loops[0].len() != k) {
        return Err(AutomataError::Invalid(format!("monomial over {} symbols, alphabet has {k}", m.loops[0].len())));
    }
    type Key = Vec<Vec<bool>>;
    let start: Key = p
        .iter()
        .map(|m| {
            let mut v = vec![false; m.degree() + 1];
            v[0] = true;
            v
        })
        .collect();
    let dead = |key: &Key| key.iter().all(|set| set.iter().all(|b| !b));
    let mut index: HashMap<Key, usize> = HashMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut delta: Vec<Vec<Option<usize>>> = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        let mut row = Vec::with_capacity(k);
        for s in 0..k {
            let next: Key = p.iter().zip(&subsets[i]).map(|(m, set)| m.step(set, s)).collect();
            if dead(&next) {
                row.push(None);
                continue;
            }
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if subsets.len() >= cap {
                        return Err(AutomataError::StateBlowup(cap));
                    }
                    subsets.push(next.clone());
                    index.insert(next, subsets.len() - 1);
                    subsets.len() - 1
                }
            };
            row.push(Some(id));
        }
        delta.push(row);
        i += 1;
    }
    let finals = subsets.iter().map(|key| p.iter().zip(key).any(|(m, set)| set[m.degree()])).collect();
    Ok(Dfa::from_table(alphabet.clone(), 0, finals, delta).minimize())
}
