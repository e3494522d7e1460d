use std::sync::Arc;

use itertools::Itertools;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptlc::alphabet::{Alphabet, Sym};
use ptlc::automata::Dfa;
use ptlc::compilers::{
    dfa_lm_distribution, find_dim, gadget_constants, podfa_to_ptl, podfa_to_transformer_lm, ptl_to_transformer,
    state_formulas, uniform_attention_values, CompileError,
};
use ptlc::langsuite::{reference_dfa, reference_ptl, LanguageId};
use ptlc::logic::{parse_ltl, random::random_ptl, Ltl, LtlDag, Mode};
use ptlc::transformer::{
    accept, forward_syms, lm_next_distribution_syms, lm_string_probability, AttentionMode, DimKind, TransformerSpec,
};
use ptlc::verify::{equiv_language, FormulaMembership, TransformerMembership, DEFAULT_BUDGET};
use ptlc::FloatSystem;

fn ab() -> Alphabet {
    Alphabet::chars("ab").unwrap()
}

fn integer_grid() -> FloatSystem {
    FloatSystem::fixed_grid(1.0, 64.0).unwrap()
}

fn half_grid() -> FloatSystem {
    FloatSystem::fixed_grid(0.5, 64.0).unwrap()
}

fn word(a: &Alphabet, s: &str) -> Vec<Sym> {
    a.parse_word(s).unwrap()
}

/// Compares the compiled recognizer against direct evaluation on every string up to `max_len`.
fn agrees_exhaustively(phi: &Ltl, a: &Alphabet, spec: &TransformerSpec, max_len: usize) -> Result<(), String> {
    let want = FormulaMembership::new(phi, a, Mode::AfterEnd).unwrap();
    let r = equiv_language(&want, &TransformerMembership(spec), a, max_len, DEFAULT_BUDGET).unwrap();
    match r.counterexample {
        None => Ok(()),
        Some(c) => Err(format!("{phi} on {:?}: expected {}, got {}", c.string, c.expected, c.actual)),
    }
}

#[test]
fn past_atom_examples() {
    let a = ab();
    let phi = parse_ltl("P a", &a).unwrap();
    let spec = ptl_to_transformer(&phi, &a, &FloatSystem::default_system()).unwrap();
    assert!(accept(&spec, &word(&a, "ab")).unwrap());
    assert!(!accept(&spec, &word(&a, "bb")).unwrap());
    agrees_exhaustively(&phi, &a, &spec, 8).unwrap();
}

#[test]
fn vanishing_attention_table() {
    let sys = integer_grid();
    assert_eq!(sys.max_attention_span(), 1);
    let a = ab();
    let spec = ptl_to_transformer(&parse_ltl("P a", &a).unwrap(), &a, &sys).unwrap();
    let trace = forward_syms(&spec, &word(&a, "ababa")).unwrap();
    let last = trace.sublayers.len() - 1;
    let row = |label: &str| -> Vec<f64> {
        let d = find_dim(&spec, label).unwrap_or_else(|| panic!("no dim {label}"));
        (1..=5).map(|n| sys.value(trace.column(last, n)[d])).collect()
    };
    assert_eq!(row("d2'(P a)"), [0.0, 1.0, 1.0, 0.0, 0.0]);
    assert_eq!(row("d2(P a)"), [0.0, 0.0, 1.0, 0.0, 0.0]);
    assert_eq!(row("d3'(P a)"), [0.0, 0.0, 0.0, 1.0, 1.0]);
    assert_eq!(row("P a"), [0.0, 1.0, 1.0, 1.0, 1.0]);
}

#[test]
fn uniform_attention_tables() {
    let vals = |sys: &FloatSystem| uniform_attention_values(sys).unwrap().iter().map(|&v| sys.value(v)).collect_vec();
    assert_eq!(vals(&integer_grid()), [1.0]);
    assert_eq!(vals(&half_grid()), [1.0, 1.0, 1.5]);
    // minifloat(4,3): the running count stalls at 16, so 1/k never vanishes
    // and the table stops once the sum stops changing
    let mf = vals(&FloatSystem::default_system());
    assert_eq!(mf.len(), 16);
    assert!(mf.iter().all(|&v| (0.875..=1.125).contains(&v)));
    assert_eq!(mf[6], 0.9375);
    assert!(gadget_constants(&FloatSystem::default_system()).is_ok());
}

#[test]
fn unsuitable_system_is_reported() {
    let s6 = FloatSystem::explicit(&[-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0]).unwrap();
    let a = ab();
    let err = ptl_to_transformer(&parse_ltl("a & P b", &a).unwrap(), &a, &s6).unwrap_err();
    assert!(matches!(err, CompileError::Unsuitable(_)), "{err}");
    assert!(matches!(ptl_to_transformer(&parse_ltl("F a", &a).unwrap(), &a, &s6), Err(CompileError::NotPtl)));
}

fn reference_formulas() -> Vec<(LanguageId, Arc<Ltl>)> {
    [LanguageId::Pt2, LanguageId::Lt1, LanguageId::Ldp1, LanguageId::Ldp2, LanguageId::First]
        .into_iter()
        .map(|id| (id, reference_ptl(id).unwrap()))
        .collect()
}

#[test]
fn reference_formulas_compile_soundly() {
    for sys in [FloatSystem::default_system(), half_grid(), integer_grid()] {
        for (id, phi) in reference_formulas() {
            let a = id.alphabet();
            let spec = ptl_to_transformer(&phi, &a, &sys).unwrap();
            let max_len = if a.len() > 3 { 5 } else { 7 };
            agrees_exhaustively(&phi, &a, &spec, max_len).unwrap();
        }
    }
}

#[test]
fn random_formulas_compile_soundly() {
    let a = ab();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sys in [FloatSystem::default_system(), half_grid(), integer_grid()] {
        for _ in 0..15 {
            let phi = random_ptl(&mut rng, &a, 4);
            let spec = ptl_to_transformer(&phi, &a, &sys).unwrap();
            agrees_exhaustively(&phi, &a, &spec, 7).unwrap();
        }
    }
}

#[test]
fn long_random_strings() {
    let a = ab();
    let phi = parse_ltl("P (a & P (b & P a))", &a).unwrap();
    let dag = LtlDag::build(&phi, &a).unwrap();
    let spec = ptl_to_transformer(&phi, &a, &half_grid()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.gen_range(0..=60);
        let w: Vec<Sym> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        assert_eq!(accept(&spec, &w).unwrap(), dag.satisfies(&w, Mode::AfterEnd));
    }
}

/// Formula dimensions hold 0/1 and mirrors hold the negation at every sublayer.
fn check_binary(spec: &TransformerSpec, w: &[Sym]) {
    let sys = &spec.system;
    let trace = forward_syms(spec, w).unwrap();
    for (h, x) in trace.sublayers.iter().enumerate() {
        for col in x {
            for info in &spec.dimension_map {
                let v = sys.value(col[info.dim]);
                match info.kind {
                    DimKind::Formula | DimKind::Symbol | DimKind::Bias => {
                        assert!(v == 0.0 || v == 1.0, "dim {} ({}) = {v} at sublayer {h}", info.dim, info.label);
                        assert_eq!(sys.value(col[info.dim + 1]), -v);
                    }
                    DimKind::Scratch => assert_eq!(sys.value(col[info.dim + 1]), -v),
                    DimKind::Mirror => {}
                }
            }
        }
    }
}

#[test]
fn binary_activation_invariant() {
    let a = ab();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let phi = random_ptl(&mut rng, &a, 4);
        for sys in [FloatSystem::default_system(), half_grid()] {
            let spec = ptl_to_transformer(&phi, &a, &sys).unwrap();
            for w in a.shortlex(5) {
                check_binary(&spec, &w);
            }
        }
    }
}

#[test]
fn average_hard_attention_gives_identical_decisions() {
    let a = ab();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let phi = random_ptl(&mut rng, &a, 3);
        let soft = ptl_to_transformer(&phi, &a, &half_grid()).unwrap();
        let mut hard = soft.clone();
        hard.attention_mode = AttentionMode::AverageHard;
        for w in a.shortlex(7) {
            assert_eq!(accept(&soft, &w).unwrap(), accept(&hard, &w).unwrap());
        }
    }
}

#[test]
fn first_dfa_formulas() {
    let d = reference_dfa(LanguageId::First).unwrap();
    let f = podfa_to_ptl(&d).unwrap();
    let a = d.alphabet().clone();
    assert!(f.acceptance.is_ptl());
    let dag = LtlDag::build(&f.acceptance, &a).unwrap();
    assert!(dag.satisfies(&word(&a, "ba"), Mode::AfterEnd));
    assert!(!dag.satisfies(&word(&a, "ab"), Mode::AfterEnd));
    for w in a.shortlex(8) {
        assert_eq!(dag.satisfies(&w, Mode::AfterEnd), d.accepts(&w).unwrap());
    }
    let json: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
    assert!(json["states"]["q_R"]["sigma"].is_string());
}

/// Exactly one λ_q holds at every position 1..=N, matching the run.
fn check_state_tracking(d: &Dfa, max_len: usize) {
    let f = state_formulas(d).unwrap();
    let a = d.alphabet().clone();
    let dags: Vec<(LtlDag, LtlDag)> = (0..f.states.len())
        .map(|q| (LtlDag::build(&f.lambda[q], &a).unwrap(), LtlDag::build(&f.sigma[q], &a).unwrap()))
        .collect();
    for w in a.shortlex(max_len) {
        let run = d.run(&w).unwrap();
        let lambdas: Vec<Vec<bool>> = dags.iter().map(|(l, _)| l.eval_root(&w)).collect();
        let sigmas: Vec<Vec<bool>> = dags.iter().map(|(_, s)| s.eval_root(&w)).collect();
        for n in 1..=w.len() + 1 {
            let expect = |q: Option<usize>| q.unwrap_or(f.sink());
            let before = expect(run[n - 1]);
            let holding: Vec<usize> = (0..f.states.len()).filter(|&q| sigmas[q][n]).collect();
            assert_eq!(holding, [before], "sigma at {n} on {w:?}");
            if n <= w.len() {
                let after = expect(run[n]);
                let holding: Vec<usize> = (0..f.states.len()).filter(|&q| lambdas[q][n]).collect();
                assert_eq!(holding, [after], "lambda at {n} on {w:?}");
            }
        }
    }
}

#[test]
fn state_tracking_on_benchmark_dfas() {
    for id in [LanguageId::First, LanguageId::Ldp1, LanguageId::Ldp2, LanguageId::Pt2, LanguageId::Lt1] {
        let d = reference_dfa(id).unwrap().minimize();
        check_state_tracking(&d, if id.symbols().len() > 3 { 5 } else { 8 });
    }
}

#[test]
fn ldp1_formula_matches_machine() {
    let d = reference_dfa(LanguageId::Ldp1).unwrap();
    let f = podfa_to_ptl(&d).unwrap();
    let dag = LtlDag::build(&f.acceptance, d.alphabet()).unwrap();
    for w in d.alphabet().shortlex(10) {
        assert_eq!(dag.satisfies(&w, Mode::AfterEnd), d.accepts(&w).unwrap());
    }
}

#[test]
fn non_po_input_is_rejected() {
    let d = reference_dfa(LanguageId::Parity).unwrap();
    assert!(matches!(podfa_to_ptl(&d), Err(CompileError::NotPartiallyOrdered)));
    assert!(podfa_to_transformer_lm(&d, &FloatSystem::default_system()).is_err());
}

#[test]
fn dfa_compiles_to_recognizer() {
    for id in [LanguageId::First, LanguageId::Ldp1, LanguageId::BbStar] {
        let d = reference_dfa(id).unwrap();
        let f = podfa_to_ptl(&d).unwrap();
        let spec = ptl_to_transformer(&f.acceptance, d.alphabet(), &FloatSystem::default_system()).unwrap();
        for w in d.alphabet().shortlex(7) {
            assert_eq!(accept(&spec, &w).unwrap(), d.accepts(&w).unwrap(), "{id} {w:?}");
        }
    }
}

#[test]
fn dfa_lm_distribution_examples() {
    let d = reference_dfa(LanguageId::First).unwrap();
    let a = d.alphabet().clone();
    let p = dfa_lm_distribution(&d, &word(&a, "b")).unwrap();
    assert_eq!(p.support(), ["a", "b", "EOS"]);
    assert!((p.prob("a").unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(dfa_lm_distribution(&d, &word(&a, "a")).unwrap().support(), ["UNK"]);
    let p = dfa_lm_distribution(&d, &[]).unwrap();
    assert_eq!(p.support(), ["b"]);
    assert_eq!(p.prob("b"), Some(1.0));
}

#[test]
fn first_language_model() {
    let sys = FloatSystem::default_system();
    let d = reference_dfa(LanguageId::First).unwrap();
    let a = d.alphabet().clone();
    let lm = podfa_to_transformer_lm(&d, &sys).unwrap();
    let third = sys.round_to(1.0 / 3.0);
    let p = lm_next_distribution_syms(&lm, &word(&a, "b")).unwrap();
    assert_eq!(p.support(&sys), ["a", "b", "EOS"]);
    assert_eq!(p.prob("EOS"), Some(third));
    assert_eq!(lm_next_distribution_syms(&lm, &word(&a, "a")).unwrap().support(&sys), ["UNK"]);
    assert_eq!(lm_next_distribution_syms(&lm, &[]).unwrap().support(&sys), ["b"]);
    assert_eq!(lm_string_probability(&lm, &word(&a, "b")).unwrap(), third);
    assert!(sys.is_zero(lm_string_probability(&lm, &word(&a, "abb")).unwrap()));
    assert!(sys.is_zero(lm_string_probability(&lm, &[]).unwrap()));
}

#[test]
fn language_models_match_dfa_distributions() {
    let sys = FloatSystem::default_system();
    for id in [LanguageId::First, LanguageId::Ldp1, LanguageId::Ldp2] {
        let d = reference_dfa(id).unwrap();
        let lm = podfa_to_transformer_lm(&d, &sys).unwrap();
        let max_len = if id.symbols().len() > 3 { 4 } else { 7 };
        for w in d.alphabet().shortlex(max_len) {
            let want = dfa_lm_distribution(&d, &w).unwrap();
            let got = lm_next_distribution_syms(&lm, &w).unwrap();
            for (i, s) in want.symbols.iter().enumerate() {
                assert_eq!(got.symbols[i], *s);
                let g = got.probs[i];
                if want.probs[i] == 0.0 {
                    assert!(sys.is_zero(g), "{id} {w:?} {s}");
                } else {
                    assert!(sys.steps_between(g, sys.round_to(want.probs[i])) <= 1, "{id} {w:?} {s}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compiled_random_formulas_agree(seed in any::<u64>()) {
        let a = ab();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_ptl(&mut rng, &a, 3);
        let spec = ptl_to_transformer(&phi, &a, &half_grid()).unwrap();
        prop_assert!(agrees_exhaustively(&phi, &a, &spec, 6).is_ok());
    }
}
