use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::alphabet::Alphabet;
use crate::automata::{Dfa, SINK_NAME};
use crate::logic::Ltl;

use super::CompileError;

/// Per-state formulas of a partially ordered DFA, over the states `Q` in
/// index order followed by the sink `q_R`.
///
/// At position `n`: `sigma[q]` holds iff the run is in `q` before reading
/// `w_n`; `epsilon[q]` iff `q` was entered strictly before `n`; `lambda[q]`
/// iff the run is in `q` after reading `w_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateFormulaSet {
    pub alphabet: Alphabet,
    pub states: Vec<String>,
    pub sigma: Vec<Arc<Ltl>>,
    pub epsilon: Vec<Arc<Ltl>>,
    pub lambda: Vec<Arc<Ltl>>,
    /// `⋁_{q ∈ F} σ_q`, read at position `N + 1`.
    pub acceptance: Arc<Ltl>,
}

#[derive(Serialize)]
struct StateEntry {
    sigma: String,
    epsilon: String,
    lambda: String,
}

#[derive(Serialize)]
struct FormulaFile {
    states: BTreeMap<String, StateEntry>,
    acceptance: String,
}

impl StateFormulaSet {
    /// Index of the sink in the per-state vectors.
    pub fn sink(&self) -> usize {
        self.states.len() - 1
    }

    pub fn index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    /// `{"states": {name: {"sigma", "epsilon", "lambda"}}, "acceptance"}`.
    pub fn to_json(&self) -> String {
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let e = StateEntry {
                    sigma: self.sigma[i].to_string(),
                    epsilon: self.epsilon[i].to_string(),
                    lambda: self.lambda[i].to_string(),
                };
                (q.clone(), e)
            })
            .collect();
        let f = FormulaFile { states, acceptance: self.acceptance.to_string() };
        serde_json::to_string_pretty(&f).expect("formula serialization cannot fail")
    }
}

/// State formulas of the minimal DFA of `L(d)`.
pub fn podfa_to_ptl(d: &Dfa) -> Result<StateFormulaSet, CompileError> {
    state_formulas(&d.minimize())
}

/// State formulas of `d` itself (its reachable part must be partially ordered).
pub fn state_formulas(d: &Dfa) -> Result<StateFormulaSet, CompileError> {
    let d = d.trim();
    let order = d.topological_order().ok_or(CompileError::NotPartiallyOrdered)?;
    let k = d.alphabet().len();
    let n = d.num_states();
    let pi: Vec<Arc<Ltl>> = d.alphabet().symbols().iter().map(|s| Ltl::atom(s.as_str())).collect();
    let exiting = |q: usize| -> Vec<usize> { (0..k).filter(|&a| d.delta(q, a) != Some(q)).collect() };

    let mut sigma: Vec<Option<Arc<Ltl>>> = vec![None; n];
    let mut epsilon: Vec<Option<Arc<Ltl>>> = vec![None; n];
    for &q in &order {
        let eps = if q == d.initial() {
            Ltl::tt()
        } else {
            let incoming = (0..n).filter(|&p| p != q).flat_map(|p| (0..k).map(move |a| (p, a))).filter_map(|(p, a)| {
                (d.delta(p, a) == Some(q)).then(|| {
                    let sp = sigma[p].clone().expect("predecessors precede in topological order");
                    Ltl::past(Ltl::and(sp, pi[a].clone()))
                })
            });
            Ltl::or_all(incoming.collect::<Vec<_>>())
        };
        let stay = exiting(q).into_iter().map(|a| {
            let left = if q == d.initial() { pi[a].clone() } else { Ltl::and(eps.clone(), pi[a].clone()) };
            Ltl::not(Ltl::past(left))
        });
        let stay: Vec<_> = stay.collect();
        sigma[q] = Some(if q == d.initial() {
            Ltl::and_all(stay)
        } else if stay.is_empty() {
            eps.clone()
        } else {
            Ltl::and(eps.clone(), Ltl::and_all(stay))
        });
        epsilon[q] = Some(eps);
    }
    let mut sigma: Vec<Arc<Ltl>> = sigma.into_iter().map(|s| s.expect("all states ordered")).collect();
    let mut epsilon: Vec<Arc<Ltl>> = epsilon.into_iter().map(|s| s.expect("all states ordered")).collect();
    let mut lambda: Vec<Arc<Ltl>> = (0..n)
        .map(|q| {
            let terms = (0..n)
                .flat_map(|p| (0..k).map(move |a| (p, a)))
                .filter(|&(p, a)| d.delta(p, a) == Some(q))
                .map(|(p, a)| Ltl::and(sigma[p].clone(), pi[a].clone()));
            Ltl::or_all(terms.collect::<Vec<_>>())
        })
        .collect();
    let sink_sigma = Ltl::not(Ltl::or_all(sigma.clone()));
    let sink_lambda = Ltl::not(Ltl::or_all(lambda.clone()));
    let acceptance = Ltl::or_all((0..n).filter(|&q| d.is_final(q)).map(|q| sigma[q].clone()).collect::<Vec<_>>());
    sigma.push(sink_sigma.clone());
    epsilon.push(sink_sigma);
    lambda.push(sink_lambda);
    let mut states = d.state_names().to_vec();
    states.push(SINK_NAME.to_string());
    Ok(StateFormulaSet { alphabet: d.alphabet().clone(), states, sigma, epsilon, lambda, acceptance })
}
