use crate::alphabet::Sym;
use crate::automata::Dfa;
use crate::fixedfloat::FloatSystem;
use crate::transformer::{AttentionMode, Head, LnMode, Masking, Matrix, TransformerSpec, EOS, UNK};

use super::po2ptl::state_formulas;
use super::ptl2tf::{dag_with_roots, Circuit};
use super::CompileError;

/// Next-symbol distribution of a DFA language model over Σ, `EOS`, `UNK`:
/// uniform over the support, with exact probabilities `1/k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmDistribution {
    pub symbols: Vec<String>,
    pub probs: Vec<f64>,
}

impl LmDistribution {
    pub fn prob(&self, symbol: &str) -> Option<f64> {
        self.symbols.iter().position(|s| s == symbol).map(|i| self.probs[i])
    }

    pub fn support(&self) -> Vec<&str> {
        self.symbols.iter().zip(&self.probs).filter(|(_, &p)| p > 0.0).map(|(s, _)| s.as_str()).collect()
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }
}

/// Support mask over Σ, `EOS`, `UNK` at a state (`None` is the sink).
///
/// A live state with no defined transition that is not final has an empty
/// support; it emits `UNK` like the sink.
pub fn support_at(d: &Dfa, q: Option<usize>) -> Vec<bool> {
    let k = d.alphabet().len();
    let mut mask = vec![false; k + 2];
    if let Some(q) = q {
        for a in 0..k {
            mask[a] = d.delta(q, a).is_some();
        }
        mask[k] = d.is_final(q);
    }
    if !mask.iter().any(|&b| b) {
        mask[k + 1] = true;
    }
    mask
}

fn output_symbols(d: &Dfa) -> Vec<String> {
    let mut out = d.alphabet().symbols().to_vec();
    out.push(EOS.into());
    out.push(UNK.into());
    out
}

/// The distribution the DFA assigns after `prefix`.
pub fn dfa_lm_distribution(d: &Dfa, prefix: &[Sym]) -> Result<LmDistribution, CompileError> {
    let q = d.state_after(prefix)?;
    let mask = support_at(d, q);
    let k = mask.iter().filter(|&&b| b).count() as f64;
    Ok(LmDistribution {
        symbols: output_symbols(d),
        probs: mask.iter().map(|&b| if b { 1.0 / k } else { 0.0 }).collect(),
    })
}

/// Compiles the language model of a DFA whose reachable part is partially
/// ordered. The head reads the state formula `σ_q` at the `EOS` column and
/// masks unsupported symbols with logit `-∞`.
pub fn podfa_to_transformer_lm(d: &Dfa, sys: &FloatSystem) -> Result<TransformerSpec, CompileError> {
    let t = d.trim();
    let formulas = state_formulas(&t)?;
    let (dag, roots) = dag_with_roots(&formulas.sigma, t.alphabet())?;
    let mut circuit = Circuit::new(&dag, sys)?;
    let slots = roots.iter().map(|&r| circuit.positive_slot(r)).collect::<Result<Vec<_>, _>>()?;
    for (i, s) in slots.iter().enumerate() {
        if slots[..i].contains(s) {
            return Err(CompileError::Unsuitable("two states share a state dimension".into()));
        }
    }
    let a = circuit.finish()?;
    let rows = t.alphabet().len() + 2;
    let mut w = Matrix::zeros(rows, a.d);
    for (i, &slot) in slots.iter().enumerate() {
        let q = (i < t.num_states()).then_some(i);
        let mask = support_at(&t, q);
        check_uniform(sys, mask.iter().filter(|&&b| b).count())?;
        for (y, &supported) in mask.iter().enumerate() {
            if !supported {
                w.set(sys, y, 2 * slot, sys.neg_inf());
            }
        }
    }
    let spec = TransformerSpec {
        system: sys.clone(),
        alphabet: t.alphabet().clone(),
        d_model: a.d,
        d_ff: a.d_ff,
        embedding: a.embedding,
        layers: a.layers,
        ln_mode: LnMode::Identity,
        attention_mode: AttentionMode::Soft,
        masking: Masking::Strict,
        head: Head::Lm { w, bias: vec![sys.zero(); rows] },
        dimension_map: a.dimension_map,
    };
    spec.validate()?;
    Ok(spec)
}

/// The uniform softmax over `k` zero logits must land within one rounding
/// step of `1/k`.
fn check_uniform(sys: &FloatSystem, k: usize) -> Result<(), CompileError> {
    let p = sys.softmax(&vec![sys.zero(); k])?[0];
    if sys.steps_between(p, sys.round_to(1.0 / k as f64)) > 1 {
        return Err(CompileError::Unsuitable(format!("uniform probability 1/{k} is not reproduced")));
    }
    Ok(())
}
