use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Sym};

use super::AutomataError;

/// Display name of the implicit rejecting sink.
pub const SINK_NAME: &str = "q_R";

/// Deterministic automaton with a partial transition function; missing
/// transitions lead to the implicit rejecting sink `q_R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    states: Vec<String>,
    initial: usize,
    finals: Vec<bool>,
    delta: Vec<Vec<Option<usize>>>,
}

/// On-disk form: `{"alphabet", "states", "initial", "finals", "delta": [[q, a, q'], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaFile {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub finals: Vec<String>,
    pub delta: Vec<(String, String, String)>,
}

impl Dfa {
    /// Builds a DFA from named parts; `delta` lists `(source, symbol, target)`.
    pub fn new<S: AsRef<str>>(
        alphabet: Alphabet,
        states: &[S],
        initial: &str,
        finals: &[S],
        delta: &[(S, S, S)],
    ) -> Result<Self, AutomataError> {
        let names: Vec<String> = states.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(AutomataError::Invalid("a DFA needs at least one state".into()));
        }
        for (i, s) in names.iter().enumerate() {
            if s == SINK_NAME || s.is_empty() {
                return Err(AutomataError::Invalid(format!("reserved or empty state name '{s}'")));
            }
            if names[..i].contains(s) {
                return Err(AutomataError::Invalid(format!("duplicate state '{s}'")));
            }
        }
        let idx = |s: &str| -> Result<usize, AutomataError> {
            names.iter().position(|n| n == s).ok_or_else(|| AutomataError::Invalid(format!("unknown state '{s}'")))
        };
        let initial = idx(initial)?;
        let mut fin = vec![false; names.len()];
        for f in finals {
            fin[idx(f.as_ref())?] = true;
        }
        let mut table = vec![vec![None; alphabet.len()]; names.len()];
        for (p, a, q) in delta {
            let (p, q) = (idx(p.as_ref())?, idx(q.as_ref())?);
            let a = alphabet.require(a.as_ref())?;
            match table[p][a] {
                Some(old) if old != q => {
                    return Err(AutomataError::Invalid(format!(
                        "nondeterministic transition from '{}' on '{}'",
                        names[p],
                        alphabet.name(a)
                    )))
                }
                _ => table[p][a] = Some(q),
            }
        }
        Ok(Dfa { alphabet, states: names, initial, finals: fin, delta: table })
    }

    /// Builds a DFA from index-based parts (state names `q0, q1, …`).
    pub fn from_table(alphabet: Alphabet, initial: usize, finals: Vec<bool>, delta: Vec<Vec<Option<usize>>>) -> Self {
        let states = (0..finals.len()).map(|i| format!("q{i}")).collect();
        Dfa { alphabet, states, initial, finals, delta }
    }

    pub fn from_file(f: &DfaFile) -> Result<Self, AutomataError> {
        let alphabet = Alphabet::new(f.alphabet.clone())?;
        let delta: Vec<(&str, &str, &str)> =
            f.delta.iter().map(|(p, a, q)| (p.as_str(), a.as_str(), q.as_str())).collect();
        let states: Vec<&str> = f.states.iter().map(String::as_str).collect();
        let finals: Vec<&str> = f.finals.iter().map(String::as_str).collect();
        Dfa::new(alphabet, &states, &f.initial, &finals, &delta)
    }

    pub fn to_file(&self) -> DfaFile {
        let mut delta = Vec::new();
        for (p, row) in self.delta.iter().enumerate() {
            for (a, q) in row.iter().enumerate() {
                if let Some(q) = q {
                    delta.push((self.states[p].clone(), self.alphabet.name(a).to_string(), self.states[*q].clone()));
                }
            }
        }
        DfaFile {
            alphabet: self.alphabet.symbols().to_vec(),
            states: self.states.clone(),
            initial: self.states[self.initial].clone(),
            finals: (0..self.states.len()).filter(|&q| self.finals[q]).map(|q| self.states[q].clone()).collect(),
            delta,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, AutomataError> {
        let f: DfaFile = serde_json::from_str(text).map_err(|e| AutomataError::Invalid(e.to_string()))?;
        Self::from_file(&f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("DFA serializes")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, q: Option<usize>) -> &str {
        match q {
            Some(q) => &self.states[q],
            None => SINK_NAME,
        }
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> &[bool] {
        &self.finals
    }

    pub fn delta(&self, q: usize, a: Sym) -> Option<usize> {
        self.delta[q][a]
    }

    /// Transition on the completed automaton (`None` is `q_R`).
    pub fn step(&self, q: Option<usize>, a: Sym) -> Option<usize> {
        q.and_then(|q| self.delta[q][a])
    }

    fn check_word(&self, w: &[Sym]) -> Result<(), AutomataError> {
        match w.iter().find(|&&s| s >= self.alphabet.len()) {
            Some(&s) => Err(AutomataError::SymbolOutOfRange(s)),
            None => Ok(()),
        }
    }

    /// State trace `q_0 … q_|w|`; `None` stands for `q_R`.
    pub fn run(&self, w: &[Sym]) -> Result<Vec<Option<usize>>, AutomataError> {
        self.check_word(w)?;
        let mut trace = Vec::with_capacity(w.len() + 1);
        let mut q = Some(self.initial);
        trace.push(q);
        for &a in w {
            q = self.step(q, a);
            trace.push(q);
        }
        Ok(trace)
    }

    /// State reached after reading `w`.
    pub fn state_after(&self, w: &[Sym]) -> Result<Option<usize>, AutomataError> {
        self.check_word(w)?;
        Ok(w.iter().fold(Some(self.initial), |q, &a| self.step(q, a)))
    }

    pub fn accepts(&self, w: &[Sym]) -> Result<bool, AutomataError> {
        Ok(self.state_after(w)?.is_some_and(|q| self.finals[q]))
    }

    /// Unchecked acceptance for words known to be over the alphabet.
    pub fn accepts_unchecked(&self, w: &[Sym]) -> bool {
        w.iter().fold(Some(self.initial), |q, &a| self.step(q, a)).is_some_and(|q| self.finals[q])
    }

    /// Symbols with a defined transition out of `q`.
    pub fn live_symbols(&self, q: usize) -> Vec<Sym> {
        (0..self.alphabet.len()).filter(|&a| self.delta[q][a].is_some()).collect()
    }

    /// True iff the graph of non-loop transitions between states is acyclic.
    pub fn is_partially_ordered(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Layered topological order of the states (ties by name), or `None`
    /// when a non-loop cycle exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.states.len();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for p in 0..n {
            let mut targets: Vec<usize> = self.delta[p].iter().flatten().copied().filter(|&q| q != p).collect();
            targets.sort();
            targets.dedup();
            for q in targets {
                indeg[q] += 1;
                succ[p].push(q);
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut layer: Vec<usize> = (0..n).filter(|&q| indeg[q] == 0).collect();
        while !layer.is_empty() {
            layer.sort_by(|&a, &b| self.states[a].cmp(&self.states[b]));
            let mut next = Vec::new();
            for &p in &layer {
                order.push(p);
                for &q in &succ[p] {
                    indeg[q] -= 1;
                    if indeg[q] == 0 {
                        next.push(q);
                    }
                }
            }
            layer = next;
        }
        (order.len() == n).then_some(order)
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            let p = order[i];
            i += 1;
            for q in self.delta[p].iter().flatten() {
                if !seen[*q] {
                    seen[*q] = true;
                    order.push(*q);
                }
            }
        }
        order
    }

    /// The reachable part, keeping state names; states stay in index order.
    pub fn trim(&self) -> Dfa {
        let mut keep = self.reachable();
        keep.sort();
        let mut map = vec![None; self.states.len()];
        for (i, &q) in keep.iter().enumerate() {
            map[q] = Some(i);
        }
        Dfa {
            alphabet: self.alphabet.clone(),
            states: keep.iter().map(|&q| self.states[q].clone()).collect(),
            initial: map[self.initial].expect("initial is reachable"),
            finals: keep.iter().map(|&q| self.finals[q]).collect(),
            delta: keep.iter().map(|&q| self.delta[q].iter().map(|t| t.and_then(|r| map[r])).collect()).collect(),
        }
    }

    /// Minimal DFA for the same language by Moore refinement on the
    /// completed automaton; states equivalent to `q_R` are hidden again and
    /// the survivors are renamed `q0, q1, …` in BFS order.
    pub fn minimize(&self) -> Dfa {
        let k = self.alphabet.len();
        let reach = self.reachable();
        // completed automaton on reachable states plus an explicit sink
        let m = reach.len();
        let sink = m;
        let mut local = HashMap::new();
        for (i, &q) in reach.iter().enumerate() {
            local.insert(q, i);
        }
        let mut tr = vec![vec![sink; k]; m + 1];
        let mut fin = vec![false; m + 1];
        for (i, &q) in reach.iter().enumerate() {
            fin[i] = self.finals[q];
            for a in 0..k {
                if let Some(t) = self.delta[q][a] {
                    tr[i][a] = local[&t];
                }
            }
        }
        let mut class: Vec<usize> = fin.iter().map(|&f| f as usize).collect();
        let mut n_classes = if fin.iter().any(|&f| f) && fin.iter().any(|&f| !f) { 2 } else { 1 };
        if n_classes == 1 {
            class.iter_mut().for_each(|c| *c = 0);
        }
        loop {
            let mut sig_ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = vec![0; m + 1];
            for p in 0..=m {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[p]);
                sig.extend(tr[p].iter().map(|&q| class[q]));
                let len = sig_ids.len();
                next[p] = *sig_ids.entry(sig).or_insert(len);
            }
            let count = sig_ids.len();
            class = next;
            if count == n_classes {
                break;
            }
            n_classes = count;
        }
        let sink_class = class[sink];
        // BFS renaming from the initial class over symbols in order
        let init_class = class[0];
        let mut rep = vec![usize::MAX; n_classes];
        for p in 0..=m {
            if rep[class[p]] == usize::MAX {
                rep[class[p]] = p;
            }
        }
        let mut order = vec![init_class];
        let mut name = vec![usize::MAX; n_classes];
        name[init_class] = 0;
        let mut queue = VecDeque::from([init_class]);
        while let Some(c) = queue.pop_front() {
            for a in 0..k {
                let d = class[tr[rep[c]][a]];
                if d != sink_class && name[d] == usize::MAX {
                    name[d] = order.len();
                    order.push(d);
                    queue.push_back(d);
                }
            }
        }
        let finals = order.iter().map(|&c| fin[rep[c]]).collect();
        let delta = order
            .iter()
            .map(|&c| {
                (0..k)
                    .map(|a| {
                        let d = class[tr[rep[c]][a]];
                        (d != sink_class).then(|| name[d])
                    })
                    .collect()
            })
            .collect();
        Dfa::from_table(self.alphabet.clone(), 0, finals, delta)
    }

    /// DFA for the complement language; the sink is materialized as a final state when needed.
    pub fn complement(&self) -> Dfa {
        let n = self.states.len();
        let k = self.alphabet.len();
        let needs_sink = self.delta.iter().flatten().any(Option::is_none);
        let total = n + needs_sink as usize;
        let delta = (0..total)
            .map(|p| (0..k).map(|a| Some(if p < n { self.delta[p][a].unwrap_or(n) } else { n })).collect())
            .collect();
        let finals = (0..total).map(|p| p >= n || !self.finals[p]).collect();
        Dfa::from_table(self.alphabet.clone(), self.initial, finals, delta)
    }

    /// Whether some final state is reachable.
    pub fn is_empty_language(&self) -> bool {
        !self.reachable().iter().any(|&q| self.finals[q])
    }

    /// Structural equality up to state renaming (both assumed reachable from the initial state).
    pub fn isomorphic(&self, other: &Dfa) -> bool {
        if self.alphabet != other.alphabet || self.num_states() != other.num_states() {
            return false;
        }
        let mut map: HashMap<usize, usize> = HashMap::from([(self.initial, other.initial)]);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(p) = queue.pop_front() {
            let q = map[&p];
            if self.finals[p] != other.finals[q] {
                return false;
            }
            for a in 0..self.alphabet.len() {
                match (self.delta[p][a], other.delta[q][a]) {
                    (None, None) => {}
                    (Some(p2), Some(q2)) => match map.get(&p2) {
                        Some(&m) if m != q2 => return false,
                        Some(_) => {}
                        None => {
                            map.insert(p2, q2);
                            queue.push_back(p2);
                        }
                    },
                    _ => return false,
                }
            }
        }
        map.len() == self.num_states()
    }
}
