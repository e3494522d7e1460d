//! Exhaustive equivalence checks between independent implementations of the
//! same language or language model, plus the coherence and masking sweeps.
//!
//! Enumeration is depth-first over a shared prefix cursor, so each side pays
//! for one symbol per visited word. The word space is split by fixed-length
//! prefixes across rayon workers; results are merged in shortlex order and do
//! not depend on the number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{Alphabet, Sym};
use crate::automata::{random::random_mixed_dfa, Dfa, DfaFile, Monoid};
use crate::compilers::{podfa_to_ptl, state_formulas, support_at, CompileError};
use crate::fixedfloat::FloatSystem;
use crate::langsuite::{membership, LanguageId};
use crate::logic::{Ltl, LtlDag, Mode};
use crate::transformer::{
    ActivationTrace, AttentionMode, Head, Layer, LnMode, Masking, Matrix, Run, TransformerSpec, UNK,
};

/// Default enumeration budget.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Prefixes are split across workers once there are at least this many.
const MIN_TASKS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("enumeration needs {needed} strings, budget is {budget}")]
    Budget { needed: u128, budget: u64 },
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// A word on which two sides disagree. Values are rendered as text so that
/// reports from different kinds of checks share one shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub string: String,
    pub expected: String,
    pub actual: String,
    /// `"<side a> vs <side b>"`.
    pub locus: String,
}

impl Counterexample {
    /// Re-evaluates both sides on the recorded word; true iff they still disagree.
    pub fn replay(&self, a: &dyn Membership, b: &dyn Membership, alphabet: &Alphabet) -> Result<bool, VerifyError> {
        let w = alphabet.parse_word(&self.string).map_err(|e| VerifyError::Incompatible(e.to_string()))?;
        Ok(render(eval_word(a, &w)) != render(eval_word(b, &w)))
    }
}

fn eval_word(side: &dyn Membership, w: &[Sym]) -> Result<bool, String> {
    let mut c = side.cursor();
    for &s in w {
        c.push(s);
    }
    c.accepts()
}

fn render(v: Result<bool, String>) -> String {
    match v {
        Ok(b) => b.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

/// One implementation of a membership test, evaluated incrementally.
pub trait Membership: Sync {
    fn name(&self) -> String;
    fn cursor(&self) -> Box<dyn MembershipCursor + '_>;
}

/// Word under construction; `push`/`pop` edit its end.
pub trait MembershipCursor {
    fn push(&mut self, a: Sym);
    fn pop(&mut self);
    fn accepts(&mut self) -> Result<bool, String>;
}

/// Wraps a plain function of the whole word.
pub struct FnMembership<F> {
    name: String,
    f: F,
}

impl<F: Fn(&[Sym]) -> Result<bool, String> + Sync> FnMembership<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnMembership { name: name.into(), f }
    }
}

struct BufferCursor<'a, F> {
    f: &'a F,
    w: Vec<Sym>,
}

impl<F: Fn(&[Sym]) -> Result<bool, String>> MembershipCursor for BufferCursor<'_, F> {
    fn push(&mut self, a: Sym) {
        self.w.push(a);
    }
    fn pop(&mut self) {
        self.w.pop();
    }
    fn accepts(&mut self) -> Result<bool, String> {
        (self.f)(&self.w)
    }
}

impl<F: Fn(&[Sym]) -> Result<bool, String> + Sync> Membership for FnMembership<F> {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn cursor(&self) -> Box<dyn MembershipCursor + '_> {
        Box::new(BufferCursor { f: &self.f, w: Vec::new() })
    }
}

/// Acceptance by a DFA.
pub struct DfaMembership<'a>(pub &'a Dfa);

struct DfaCursor<'a> {
    d: &'a Dfa,
    states: Vec<Option<usize>>,
}

impl MembershipCursor for DfaCursor<'_> {
    fn push(&mut self, a: Sym) {
        let q = *self.states.last().expect("initial state");
        self.states.push(self.d.step(q, a));
    }
    fn pop(&mut self) {
        self.states.pop();
    }
    fn accepts(&mut self) -> Result<bool, String> {
        Ok(self.states.last().expect("initial state").is_some_and(|q| self.d.is_final(q)))
    }
}

impl Membership for DfaMembership<'_> {
    fn name(&self) -> String {
        "dfa".into()
    }
    fn cursor(&self) -> Box<dyn MembershipCursor + '_> {
        Box::new(DfaCursor { d: self.0, states: vec![Some(self.0.initial())] })
    }
}

/// Satisfaction of a temporal formula under a reading mode.
pub struct FormulaMembership {
    dag: LtlDag,
    mode: Mode,
}

impl FormulaMembership {
    pub fn new(phi: &Ltl, alphabet: &Alphabet, mode: Mode) -> Result<Self, VerifyError> {
        let dag = LtlDag::build(phi, alphabet).map_err(|e| VerifyError::Incompatible(e.to_string()))?;
        Ok(FormulaMembership { dag, mode })
    }
}

impl Membership for FormulaMembership {
    fn name(&self) -> String {
        "formula".into()
    }
    fn cursor(&self) -> Box<dyn MembershipCursor + '_> {
        let f = move |w: &[Sym]| -> Result<bool, String> { Ok(self.dag.satisfies(w, self.mode)) };
        Box::new(OwnedBufferCursor { f: Box::new(f), w: Vec::new() })
    }
}

type WordFn<'a> = Box<dyn Fn(&[Sym]) -> Result<bool, String> + 'a>;

struct OwnedBufferCursor<'a> {
    f: WordFn<'a>,
    w: Vec<Sym>,
}

impl MembershipCursor for OwnedBufferCursor<'_> {
    fn push(&mut self, a: Sym) {
        self.w.push(a);
    }
    fn pop(&mut self) {
        self.w.pop();
    }
    fn accepts(&mut self) -> Result<bool, String> {
        (self.f)(&self.w)
    }
}

/// Benchmark-language membership.
pub struct LanguageMembership(pub LanguageId);

impl Membership for LanguageMembership {
    fn name(&self) -> String {
        format!("membership({})", self.0.name())
    }
    fn cursor(&self) -> Box<dyn MembershipCursor + '_> {
        let id = self.0;
        let f = move |w: &[Sym]| membership(id, w).map_err(|e| e.to_string());
        Box::new(OwnedBufferCursor { f: Box::new(f), w: Vec::new() })
    }
}

/// Classifier decisions of a transformer.
pub struct TransformerMembership<'a>(pub &'a TransformerSpec);

/// Keeps a [`Run`] in step with the word; after an arithmetic failure the
/// failing position and everything below it report the error.
struct TransformerCursor<'a> {
    run: Run<'a>,
    depth: usize,
    failure: Option<(usize, String)>,
}

impl TransformerCursor<'_> {
    fn push(&mut self, a: Sym) {
        self.depth += 1;
        if self.failure.is_none() {
            if let Err(e) = self.run.push(a) {
                self.failure = Some((self.depth, e.to_string()));
            }
        }
    }
    fn pop(&mut self) {
        match &self.failure {
            Some((d, _)) if *d == self.depth => self.failure = None,
            Some(_) => {}
            None => self.run.pop(),
        }
        self.depth -= 1;
    }
}

impl MembershipCursor for TransformerCursor<'_> {
    fn push(&mut self, a: Sym) {
        TransformerCursor::push(self, a)
    }
    fn pop(&mut self) {
        TransformerCursor::pop(self)
    }
    fn accepts(&mut self) -> Result<bool, String> {
        if let Some((_, e)) = &self.failure {
            return Err(e.clone());
        }
        self.run.accepts().map_err(|e| e.to_string())
    }
}

impl Membership for TransformerMembership<'_> {
    fn name(&self) -> String {
        "transformer".into()
    }
    fn cursor(&self) -> Box<dyn MembershipCursor + '_> {
        Box::new(TransformerCursor { run: Run::lean(self.0), depth: 0, failure: None })
    }
}

/// Outcome of an exhaustive comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivReport {
    pub locus: String,
    pub alphabet: Vec<String>,
    pub max_len: usize,
    pub budget: u64,
    /// Words actually evaluated (fewer than the full count once a
    /// counterexample bounds the search).
    pub checked: u64,
    pub counterexample: Option<Counterexample>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn check_budget(k: usize, max_len: usize, budget: u64) -> Result<(), VerifyError> {
    let needed = (k.max(1) as u128).checked_pow(max_len as u32 + 1).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(VerifyError::Budget { needed, budget });
    }
    Ok(())
}

/// A pair of synchronized cursors; `check` compares them on the current word.
trait Probe {
    fn push(&mut self, a: Sym);
    fn pop(&mut self);
    fn check(&mut self) -> Option<(String, String)>;
}

type Found = (Vec<Sym>, String, String);

/// Visits every word of length `< bound` extending the probe's current word
/// (of length `len`) in lexicographic preorder; keeps the shortlex-least
/// disagreement and tightens the bound to its length.
fn dfs<P: Probe>(p: &mut P, w: &mut Vec<Sym>, k: usize, max_len: usize, checked: &mut u64, best: &mut Option<Found>) {
    if best.as_ref().is_some_and(|b| w.len() >= b.0.len()) {
        return;
    }
    *checked += 1;
    if let Some((e, a)) = p.check() {
        *best = Some((w.clone(), e, a));
        return;
    }
    if w.len() == max_len {
        return;
    }
    for s in 0..k {
        w.push(s);
        p.push(s);
        dfs(p, w, k, max_len, checked, best);
        p.pop();
        w.pop();
    }
}

/// Shortlex-first disagreement over all words of length `0..=max_len`.
fn search<P: Probe, F: Fn() -> P + Sync>(make: F, k: usize, max_len: usize) -> (u64, Option<Found>) {
    let mut split = 0;
    while split < max_len && k.pow(split as u32) < MIN_TASKS && k > 1 {
        split += 1;
    }
    // Words shorter than the split length, in shortlex order.
    let mut checked = 0;
    let alphabet_words = crate::alphabet::Shortlex::over(k, split.saturating_sub(1));
    if split > 0 {
        let mut p = make();
        let mut cur: Vec<Sym> = Vec::new();
        for w in alphabet_words {
            sync(&mut p, &mut cur, &w);
            checked += 1;
            if let Some((e, a)) = p.check() {
                return (checked, Some((w, e, a)));
            }
        }
    }
    let prefixes: Vec<Vec<Sym>> = crate::alphabet::Shortlex::over(k, split).filter(|w| w.len() == split).collect();
    let results: Vec<(u64, Option<Found>)> = prefixes
        .par_iter()
        .map(|prefix| {
            let mut p = make();
            for &s in prefix {
                p.push(s);
            }
            let mut w = prefix.clone();
            let mut n = 0;
            let mut best = None;
            dfs(&mut p, &mut w, k, max_len, &mut n, &mut best);
            (n, best)
        })
        .collect();
    let mut best: Option<Found> = None;
    for (n, found) in results {
        checked += n;
        if let Some(f) = found {
            if best.as_ref().map_or(true, |b| f.0.len() < b.0.len()) {
                best = Some(f);
            }
        }
    }
    (checked, best)
}

/// Moves a probe from word `cur` to word `next` through their common prefix.
fn sync<P: Probe>(p: &mut P, cur: &mut Vec<Sym>, next: &[Sym]) {
    let common = cur.iter().zip(next).take_while(|(a, b)| a == b).count();
    while cur.len() > common {
        cur.pop();
        p.pop();
    }
    for &s in &next[common..] {
        cur.push(s);
        p.push(s);
    }
}

struct LanguageProbe<'a> {
    a: Box<dyn MembershipCursor + 'a>,
    b: Box<dyn MembershipCursor + 'a>,
}

impl Probe for LanguageProbe<'_> {
    fn push(&mut self, s: Sym) {
        self.a.push(s);
        self.b.push(s);
    }
    fn pop(&mut self) {
        self.a.pop();
        self.b.pop();
    }
    fn check(&mut self) -> Option<(String, String)> {
        let (x, y) = (render(self.a.accepts()), render(self.b.accepts()));
        (x != y).then_some((x, y))
    }
}

/// Compares two membership tests on every word of length `0..=max_len`.
/// Side `a` is reported as the expected value.
pub fn equiv_language(
    a: &dyn Membership,
    b: &dyn Membership,
    alphabet: &Alphabet,
    max_len: usize,
    budget: u64,
) -> Result<EquivReport, VerifyError> {
    check_budget(alphabet.len(), max_len, budget)?;
    let locus = format!("{} vs {}", a.name(), b.name());
    let (checked, found) = search(|| LanguageProbe { a: a.cursor(), b: b.cursor() }, alphabet.len(), max_len);
    Ok(EquivReport {
        locus: locus.clone(),
        alphabet: alphabet.symbols().to_vec(),
        max_len,
        budget,
        checked,
        counterexample: found.map(|(w, expected, actual)| Counterexample {
            string: alphabet.format_word(&w),
            expected,
            actual,
            locus,
        }),
    })
}

struct LmProbe<'a> {
    d: &'a Dfa,
    sys: &'a FloatSystem,
    tolerance: Option<u32>,
    states: Vec<Option<usize>>,
    tf: TransformerCursor<'a>,
}

impl LmProbe<'_> {
    fn describe(symbols: &[String], probs: &[String]) -> String {
        symbols
            .iter()
            .zip(probs)
            .filter(|(_, p)| p.as_str() != "0")
            .map(|(s, p)| format!("{s}:{p}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Probe for LmProbe<'_> {
    fn push(&mut self, a: Sym) {
        let q = *self.states.last().expect("initial state");
        self.states.push(self.d.step(q, a));
        self.tf.push(a);
    }
    fn pop(&mut self) {
        self.states.pop();
        self.tf.pop();
    }
    fn check(&mut self) -> Option<(String, String)> {
        let mask = support_at(self.d, *self.states.last().expect("initial state"));
        let k = mask.iter().filter(|&&b| b).count() as f64;
        let want: Vec<f64> = mask.iter().map(|&b| if b { 1.0 / k } else { 0.0 }).collect();
        let symbols = self.tf.run.spec().output_symbols();
        let expected = || {
            let text: Vec<String> = want.iter().map(|&p| crate::fixedfloat::format_f64(p)).collect();
            Self::describe(&symbols, &text)
        };
        let got = match &self.tf.failure {
            Some((_, e)) => Err(e.clone()),
            None => self.tf.run.next_distribution().map_err(|e| e.to_string()),
        };
        let got = match got {
            Ok(g) => g,
            Err(e) => return Some((expected(), format!("error: {e}"))),
        };
        let support_ok = mask.iter().zip(&got.probs).all(|(&m, &p)| m != self.sys.is_zero(p));
        let within = |tol: u32| {
            want.iter().zip(&got.probs).all(|(&w, &p)| self.sys.steps_between(self.sys.round_to(w), p) <= tol)
        };
        if support_ok && self.tolerance.map_or(true, within) {
            return None;
        }
        let actual: Vec<String> = got.probs.iter().map(|&p| self.sys.format(p)).collect();
        Some((expected(), Self::describe(&symbols, &actual)))
    }
}

/// Compares a compiled LM against the DFA's uniform next-symbol
/// distributions on every prefix of length `0..=max_len`.
///
/// Supports must match exactly (so the sink must emit `UNK` alone); with a
/// tolerance, every probability must also lie within that many rounding
/// steps of the rounded DFA value. `None` checks supports only.
pub fn equiv_lm(
    d: &Dfa,
    spec: &TransformerSpec,
    max_len: usize,
    tolerance: Option<u32>,
    budget: u64,
) -> Result<EquivReport, VerifyError> {
    if !matches!(spec.head, Head::Lm { .. }) {
        return Err(VerifyError::Incompatible("spec has no language-model head".into()));
    }
    if spec.alphabet != *d.alphabet() {
        return Err(VerifyError::Incompatible("DFA and spec alphabets differ".into()));
    }
    debug_assert_eq!(spec.output_symbols().last().map(String::as_str), Some(UNK));
    check_budget(d.alphabet().len(), max_len, budget)?;
    let make = || LmProbe {
        d,
        sys: &spec.system,
        tolerance,
        states: vec![Some(d.initial())],
        tf: TransformerCursor { run: Run::lean(spec), depth: 0, failure: None },
    };
    let (checked, found) = search(make, d.alphabet().len(), max_len);
    let locus = "dfa lm vs transformer lm".to_string();
    Ok(EquivReport {
        locus: locus.clone(),
        alphabet: d.alphabet().symbols().to_vec(),
        max_len,
        budget,
        checked,
        counterexample: found.map(|(w, expected, actual)| Counterexample {
            string: d.alphabet().format_word(&w),
            expected,
            actual,
            locus,
        }),
    })
}

/// Knobs for [`coherence_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub max_symbols: usize,
    /// Words up to this length are compared when the formulas compile.
    pub enumeration_len: usize,
    /// Fault injection: test partial order on the DFA as given.
    pub skip_minimization: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { max_symbols: 3, enumeration_len: 6, skip_minimization: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceFailure {
    pub index: usize,
    pub seed: u64,
    pub r_trivial: bool,
    pub r_trivial_via_exponent: bool,
    pub partially_ordered: bool,
    pub formulas_verified: bool,
    pub detail: Option<String>,
    pub dfa: DfaFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub n_dfas: usize,
    pub max_states: usize,
    pub seed: u64,
    pub options: SweepOptions,
    pub coherent: usize,
    pub r_trivial: usize,
    pub failures: Vec<CoherenceFailure>,
}

impl CoherenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Seed of the `i`-th DFA of a sweep.
pub fn sweep_dfa_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

/// Draws random DFAs and checks that R-triviality (two ways), partial order
/// of the minimal DFA, and successful compilation to verified state
/// formulas all agree.
pub fn coherence_sweep(n_dfas: usize, max_states: usize, seed: u64, options: SweepOptions) -> CoherenceReport {
    let outcomes: Vec<(bool, Option<CoherenceFailure>)> = (0..n_dfas)
        .into_par_iter()
        .map(|i| {
            let dfa_seed = sweep_dfa_seed(seed, i);
            let d = random_mixed_dfa(&mut ChaCha8Rng::seed_from_u64(dfa_seed), max_states, options.max_symbols);
            coherence_one(&d, i, dfa_seed, options)
        })
        .collect();
    let r_trivial = outcomes.iter().filter(|o| o.0).count();
    let failures: Vec<CoherenceFailure> = outcomes.into_iter().filter_map(|o| o.1).collect();
    CoherenceReport { n_dfas, max_states, seed, options, coherent: n_dfas - failures.len(), r_trivial, failures }
}

fn coherence_one(d: &Dfa, index: usize, seed: u64, options: SweepOptions) -> (bool, Option<CoherenceFailure>) {
    let fail = |r1, r2, po, fv, detail: Option<String>| CoherenceFailure {
        index,
        seed,
        r_trivial: r1,
        r_trivial_via_exponent: r2,
        partially_ordered: po,
        formulas_verified: fv,
        detail,
        dfa: d.to_file(),
    };
    let m = match Monoid::of_dfa(d) {
        Ok(m) => m,
        Err(e) => return (false, Some(fail(false, false, false, false, Some(e.to_string())))),
    };
    let r1 = m.is_r_trivial();
    let r2 = m.is_r_trivial_via_exponent();
    let po = if options.skip_minimization { d.is_partially_ordered() } else { d.minimize().is_partially_ordered() };
    let compiled = if options.skip_minimization { state_formulas(d) } else { podfa_to_ptl(d) };
    let (verified, detail) = match compiled {
        Ok(f) => {
            let check = FormulaMembership::new(&f.acceptance, d.alphabet(), Mode::AfterEnd).and_then(|phi| {
                equiv_language(&DfaMembership(d), &phi, d.alphabet(), options.enumeration_len, DEFAULT_BUDGET)
            });
            match check {
                Ok(r) if r.passed() => (true, None),
                Ok(r) => (false, r.counterexample.map(|c| format!("formula disagrees on {:?}", c.string))),
                Err(e) => (false, Some(e.to_string())),
            }
        }
        Err(CompileError::NotPartiallyOrdered) => (false, None),
        Err(e) => (false, Some(e.to_string())),
    };
    let coherent = r1 == r2 && r2 == po && po == verified;
    (r1, (!coherent).then(|| fail(r1, r2, po, verified, detail)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseViolation {
    pub string: String,
    pub layer: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseReport {
    /// Strict masking is outside the scope of the collapse property.
    pub exempt: bool,
    pub strings_checked: usize,
    pub violations: Vec<CollapseViolation>,
    pub errors: Vec<String>,
}

impl CollapseReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.errors.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Under non-strict masking, a word `sⁿ` of one repeated symbol has the same
/// column at every position of every sublayer. Checks this for each symbol
/// `s` and `n = 1..=n_strings`.
pub fn nonstrict_collapse_check(spec: &TransformerSpec, n_strings: usize) -> CollapseReport {
    let mut report = CollapseReport { exempt: false, strings_checked: 0, violations: Vec::new(), errors: Vec::new() };
    if spec.masking == Masking::Strict {
        report.exempt = true;
        return report;
    }
    for s in 0..spec.alphabet.len() {
        let mut run = Run::new(spec);
        for n in 1..=n_strings {
            if let Err(e) = run.push(s) {
                report.errors.push(format!("{}: {e}", spec.alphabet.format_word(&vec![s; n])));
                break;
            }
            report.strings_checked += 1;
            for h in 0..=2 * spec.layers.len() {
                if run.column(h, n) != run.column(h, 1) {
                    report.violations.push(CollapseViolation {
                        string: spec.alphabet.format_word(&vec![s; n]),
                        layer: ActivationTrace::label(h),
                        position: n,
                    });
                }
            }
        }
    }
    report
}

/// True iff some sublayer distinguishes positions 1 and 2 of the word `ss`.
pub fn separates_first_positions(spec: &TransformerSpec, s: Sym) -> Result<bool, VerifyError> {
    let mut run = Run::new(spec);
    for _ in 0..2 {
        run.push(s).map_err(|e| VerifyError::Incompatible(e.to_string()))?;
    }
    Ok((0..=2 * spec.layers.len()).any(|h| run.column(h, 1) != run.column(h, 2)))
}

/// Random classifier spec with small weights, single-head soft attention
/// and no layer norm. Weight entries are drawn from `{0, ±1/4, ±1/2}` with
/// density about one half.
pub fn random_spec<R: Rng>(
    rng: &mut R,
    sys: &FloatSystem,
    alphabet: &Alphabet,
    d_model: usize,
    layers: usize,
    masking: Masking,
) -> TransformerSpec {
    let choices = [-0.5, -0.25, 0.25, 0.5];
    let draw = |rng: &mut R| if rng.gen_bool(0.5) { sys.round_to(choices[rng.gen_range(0..4)]) } else { sys.zero() };
    let matrix = |rng: &mut R, r: usize, c: usize| {
        let mut m = Matrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                let v = draw(rng);
                m.set(sys, i, j, v);
            }
        }
        m
    };
    let embedding: Vec<Vec<_>> = (0..=alphabet.len())
        .map(|_| (0..d_model).map(|_| sys.round_to(choices[rng.gen_range(0..4)])).collect())
        .collect();
    let layers = (0..layers)
        .map(|_| {
            let mut l = Layer::zeros(sys, d_model, d_model);
            l.wq = matrix(rng, d_model, d_model);
            l.wk = matrix(rng, d_model, d_model);
            l.wv = matrix(rng, d_model, d_model);
            l.wf1 = matrix(rng, d_model, d_model);
            l.wf2 = matrix(rng, d_model, d_model);
            l
        })
        .collect();
    let theta = (0..d_model).map(|_| sys.round_to(choices[rng.gen_range(0..4)])).collect();
    TransformerSpec {
        system: sys.clone(),
        alphabet: alphabet.clone(),
        d_model,
        d_ff: d_model,
        embedding,
        layers,
        ln_mode: LnMode::Identity,
        attention_mode: AttentionMode::Soft,
        masking,
        head: Head::Classifier { theta, bias: sys.zero() },
        dimension_map: Vec::new(),
    }
}
