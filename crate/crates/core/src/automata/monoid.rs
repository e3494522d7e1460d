use std::collections::{HashMap, HashSet, VecDeque};

use crate::alphabet::{Alphabet, Sym};

use super::dfa::Dfa;
use super::AutomataError;

/// Default cap on the number of monoid elements.
pub const MONOID_CAP: usize = 100_000;

/// Largest monoid for which a full multiplication table is kept.
const TABLE_LIMIT: usize = 2048;

/// Largest monoid for which right ideals are compared as explicit sets.
const IDEAL_SET_LIMIT: usize = 4096;

/// Transformation monoid of a complete DFA: maps on `Q̄ = Q ∪ {q_R}`
/// (the sink is the last point), composed left to right.
#[derive(Debug, Clone)]
pub struct Monoid {
    alphabet: Alphabet,
    points: usize,
    elements: Vec<Vec<u16>>,
    witness: Vec<Vec<Sym>>,
    index: HashMap<Vec<u16>, usize>,
    /// `right[e][a] = e·a`
    right: Vec<Vec<usize>>,
    generator_of: Vec<usize>,
    table: Option<Vec<u32>>,
}

impl Monoid {
    /// Transition monoid of `minimize(d)`.
    pub fn of_dfa(d: &Dfa) -> Result<Monoid, AutomataError> {
        Self::of_dfa_capped(d, MONOID_CAP)
    }

    pub fn of_dfa_capped(d: &Dfa, cap: usize) -> Result<Monoid, AutomataError> {
        let m = d.minimize();
        Self::of_complete(&m, cap)
    }

    /// Transition monoid of `d` as given (no minimization).
    pub fn of_complete(d: &Dfa, cap: usize) -> Result<Monoid, AutomataError> {
        let n = d.num_states();
        let points = n + 1;
        let k = d.alphabet().len();
        let gens: Vec<Vec<u16>> = (0..k)
            .map(|a| (0..points).map(|q| if q == n { n } else { d.delta(q, a).unwrap_or(n) } as u16).collect())
            .collect();
        let identity: Vec<u16> = (0..points as u16).collect();
        let mut elements = vec![identity.clone()];
        let mut witness = vec![Vec::new()];
        let mut index = HashMap::from([(identity, 0usize)]);
        let mut right: Vec<Vec<usize>> = Vec::new();
        let mut i = 0;
        while i < elements.len() {
            let mut row = Vec::with_capacity(k);
            for a in 0..k {
                let prod: Vec<u16> = elements[i].iter().map(|&q| gens[a][q as usize]).collect();
                let id = match index.get(&prod) {
                    Some(&id) => id,
                    None => {
                        if elements.len() >= cap {
                            return Err(AutomataError::MonoidTooLarge(cap));
                        }
                        let mut w = witness[i].clone();
                        w.push(a);
                        elements.push(prod.clone());
                        witness.push(w);
                        index.insert(prod, elements.len() - 1);
                        elements.len() - 1
                    }
                };
                row.push(id);
            }
            right.push(row);
            i += 1;
        }
        let generator_of = (0..k).map(|a| right[0][a]).collect();
        let mut mon = Monoid {
            alphabet: d.alphabet().clone(),
            points,
            elements,
            witness,
            index,
            right,
            generator_of,
            table: None,
        };
        if mon.len() <= TABLE_LIMIT {
            let size = mon.len();
            let mut t = vec![0u32; size * size];
            for s in 0..size {
                for u in 0..size {
                    t[s * size + u] = mon.mul_slow(s, u) as u32;
                }
            }
            mon.table = Some(t);
        }
        Ok(mon)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of points of `Q̄` the maps act on.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn element(&self, e: usize) -> &[u16] {
        &self.elements[e]
    }

    /// A shortest word inducing `e`.
    pub fn witness(&self, e: usize) -> &[Sym] {
        &self.witness[e]
    }

    pub fn generator(&self, a: Sym) -> usize {
        self.generator_of[a]
    }

    pub fn right_mul_gen(&self, e: usize, a: Sym) -> usize {
        self.right[e][a]
    }

    pub fn lookup(&self, map: &[u16]) -> Option<usize> {
        self.index.get(map).copied()
    }

    fn mul_slow(&self, s: usize, t: usize) -> usize {
        self.witness[t].iter().fold(s, |e, &a| self.right[e][a])
    }

    /// Product `s·t` (apply `s`, then `t`).
    pub fn mul(&self, s: usize, t: usize) -> usize {
        match &self.table {
            Some(tab) => tab[s * self.len() + t] as usize,
            None => self.mul_slow(s, t),
        }
    }

    pub fn pow(&self, s: usize, k: usize) -> usize {
        (0..k).fold(self.identity(), |acc, _| self.mul(acc, s))
    }

    /// `(index, period)` of the cyclic subsemigroup generated by `s`.
    pub fn index_period(&self, s: usize) -> (usize, usize) {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut cur = s;
        let mut i = 1;
        loop {
            if let Some(&j) = seen.get(&cur) {
                return (j, i - j);
            }
            seen.insert(cur, i);
            cur = self.mul(cur, s);
            i += 1;
        }
    }

    pub fn is_idempotent(&self, e: usize) -> bool {
        self.mul(e, e) == e
    }

    /// The idempotent power `s^ω`.
    pub fn omega(&self, s: usize) -> usize {
        let (idx, per) = self.index_period(s);
        // smallest multiple of the period that is at least the index
        let k = idx.div_ceil(per) * per;
        self.pow(s, k.max(1))
    }

    /// Checks closure, identity and (for small monoids) associativity.
    pub fn check_laws(&self) -> bool {
        let n = self.len();
        for s in 0..n {
            if self.mul(0, s) != s || self.mul(s, 0) != s {
                return false;
            }
            let composed: Vec<u16> = self.elements[s].clone();
            for a in 0..self.alphabet.len() {
                let g = &self.elements[self.generator_of[a]];
                let want: Vec<u16> = composed.iter().map(|&q| g[q as usize]).collect();
                if self.lookup(&want) != Some(self.right[s][a]) {
                    return false;
                }
            }
        }
        if n <= 200 {
            for s in 0..n {
                for t in 0..n {
                    for u in 0..n {
                        if self.mul(self.mul(s, t), u) != self.mul(s, self.mul(t, u)) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Strongly connected components of the right Cayley graph
    /// (`s ~ t` iff `sM = tM`), as a component id per element.
    fn right_sccs(&self) -> Vec<usize> {
        let adj: Vec<Vec<usize>> = self.right.clone();
        tarjan(&adj)
    }

    /// Pairs `s ≠ t` with `sM = tM`, if any.
    pub fn r_trivial_witness(&self) -> Option<(usize, usize)> {
        if self.len() <= IDEAL_SET_LIMIT {
            // explicit right ideals as bitsets
            let n = self.len();
            let words = n.div_ceil(64);
            let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
            for s in 0..n {
                let mut bits = vec![0u64; words];
                let mut stack = vec![s];
                bits[s / 64] |= 1 << (s % 64);
                while let Some(e) = stack.pop() {
                    for &f in &self.right[e] {
                        if bits[f / 64] & (1 << (f % 64)) == 0 {
                            bits[f / 64] |= 1 << (f % 64);
                            stack.push(f);
                        }
                    }
                }
                if let Some(&t) = seen.get(&bits) {
                    return Some((t, s));
                }
                seen.insert(bits, s);
            }
            None
        } else {
            let comp = self.right_sccs();
            let mut first: HashMap<usize, usize> = HashMap::new();
            for (s, &c) in comp.iter().enumerate() {
                if let Some(&t) = first.get(&c) {
                    return Some((t, s));
                }
                first.insert(c, s);
            }
            None
        }
    }

    /// `sM = tM ⇒ s = t`.
    pub fn is_r_trivial(&self) -> bool {
        self.r_trivial_witness().is_none()
    }

    /// R-triviality via the identity `(st)^K s = (st)^K`, where `K` is the
    /// largest index over all elements.
    pub fn is_r_trivial_via_exponent(&self) -> bool {
        let n = self.len();
        let k = (0..n).map(|s| self.index_period(s).0).max().unwrap_or(1).max(1);
        let pow_k: Vec<usize> = (0..n).map(|e| self.pow(e, k)).collect();
        for s in 0..n {
            for t in 0..n {
                let p = pow_k[self.mul(s, t)];
                if self.mul(p, s) != p {
                    return false;
                }
            }
        }
        true
    }

    /// An element with `s^k ≠ s^{k+1}` for all `k`, if any.
    pub fn aperiodicity_witness(&self) -> Option<usize> {
        (0..self.len()).find(|&s| self.index_period(s).1 != 1)
    }

    pub fn is_aperiodic(&self) -> bool {
        self.aperiodicity_witness().is_none()
    }

    /// A pair `(e, y)` with `e` idempotent, `e ∈ MyM` and `eye ≠ e`, if any.
    ///
    /// This is the identity `(xyz)^ω y (xyz)^ω = (xyz)^ω` with the triple
    /// folded into its idempotent: every idempotent below `y` in the
    /// two-sided order has the form `(xyz)^ω`.
    pub fn da_witness(&self) -> Option<(usize, usize)> {
        let n = self.len();
        let k = self.alphabet.len();
        // reverse edges of the two-sided Cayley graph
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for y in 0..n {
            for a in 0..k {
                rev[self.right[y][a]].push(y);
                let g = self.generator_of[a];
                rev[self.mul(g, y)].push(y);
            }
        }
        for e in (0..n).filter(|&e| self.is_idempotent(e)) {
            let mut seen = vec![false; n];
            seen[e] = true;
            let mut queue = VecDeque::from([e]);
            while let Some(y) = queue.pop_front() {
                if self.mul(self.mul(e, y), e) != e {
                    return Some((e, y));
                }
                for &z in &rev[y] {
                    if !seen[z] {
                        seen[z] = true;
                        queue.push_back(z);
                    }
                }
            }
        }
        None
    }

    pub fn is_in_da(&self) -> bool {
        self.da_witness().is_none()
    }

    /// Brute-force DA test straight from the identity over all triples.
    pub fn is_in_da_brute_force(&self) -> bool {
        let n = self.len();
        let omega: Vec<usize> = (0..n).map(|s| self.omega(s)).collect();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let e = omega[self.mul(self.mul(x, y), z)];
                    if self.mul(self.mul(e, y), e) != e {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Distinct right ideals compared directly as sets `{s·m}` (test oracle).
    pub fn is_r_trivial_brute_force(&self) -> bool {
        let n = self.len();
        let mut ideals = HashSet::new();
        for s in 0..n {
            let mut ideal: Vec<usize> = (0..n).map(|m| self.mul(s, m)).collect();
            ideal.sort();
            ideal.dedup();
            if !ideals.insert(ideal) {
                return false;
            }
        }
        true
    }
}

/// Iterative Tarjan SCC; returns a component id per vertex.
fn tarjan(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut n_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = n_comp;
                        if w == v {
                            break;
                        }
                    }
                    n_comp += 1;
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tarjan_on_small_graph() {
        let adj = vec![vec![1], vec![0, 2], vec![2]];
        let c = tarjan(&adj);
        assert_eq!(c[0], c[1]);
        assert_ne!(c[0], c[2]);
    }
}
