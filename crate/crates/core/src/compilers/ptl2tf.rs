//! PTL → transformer recognizer.
//!
//! Every slot owns a primary dimension `2s` and a mirror `2s + 1` holding the
//! negated value. Boolean structure is flattened into conjunctions of
//! literals computed by single ReLU units; each `P ψ` becomes a two-stage
//! attention gadget that stays exact when uniform attention vanishes.

use std::collections::HashMap;
use std::sync::Arc;

use crate::alphabet::Alphabet;
use crate::fixedfloat::{FVal, FloatSystem};
use crate::logic::{Ltl, LtlDag, Node};
use crate::transformer::{apply_ffn, AttentionMode, DimInfo, DimKind, Head, Layer, LnMode, Masking, TransformerSpec};

use super::CompileError;

/// Longest conjunction a single unit computes; bounded further by the
/// largest `k` with every integer in `-k..=k` exactly representable.
const MAX_FAN_IN: usize = 8;

/// Iteration cap for tabulating uniform-attention sums.
const MAX_TABLE: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Lit {
    slot: usize,
    neg: bool,
}

impl Lit {
    fn flip(self) -> Lit {
        Lit { slot: self.slot, neg: !self.neg }
    }
}

#[derive(Debug, Clone)]
enum Form {
    Lit(Lit),
    /// `neg ? ¬⋀lits : ⋀lits` with at least two literals.
    Conj {
        neg: bool,
        lits: Vec<Lit>,
    },
}

struct Slot {
    kind: DimKind,
    label: String,
    ready: usize,
}

struct Gate {
    layer: usize,
    out: usize,
    lits: Vec<Lit>,
}

struct Past {
    l1: usize,
    l2: usize,
    d1: usize,
    d2_raw: usize,
    d2_bin: usize,
    d2: usize,
    d3_raw: usize,
    d3: usize,
}

/// Scale constants of the past gadget, chosen by exhaustive self-test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetConstants {
    /// Multiplier lifting any nonzero attention output to at least 1.
    pub m: FVal,
    /// Offset gating the first-stage conjunction.
    pub k: FVal,
}

/// `v_c`: the output of uniform attention over `c` ones, for `c = 1, 2, …`
/// until it vanishes or stabilises.
pub fn uniform_attention_values(sys: &FloatSystem) -> Result<Vec<FVal>, CompileError> {
    let mut out = Vec::new();
    let mut s = sys.zero();
    let mut prev: Option<(FVal, FVal)> = None;
    for _ in 0..MAX_TABLE {
        s = sys.add(s, sys.one())?;
        let alpha = sys.div(sys.one(), s)?;
        if sys.is_zero(alpha) {
            return Ok(out);
        }
        let v = match prev {
            Some((pa, pv)) if pa == alpha => sys.add(pv, alpha)?,
            _ => {
                let c = out.len() + 1;
                sys.sum(std::iter::repeat(alpha).take(c))?
            }
        };
        if let Some((pa, pv)) = prev {
            if pa == alpha && pv == v {
                return Ok(out);
            }
        }
        out.push(v);
        prev = Some((alpha, v));
    }
    Err(CompileError::Unsuitable("uniform attention sums do not stabilise".into()))
}

fn f(sys: &FloatSystem, x: f64) -> FVal {
    sys.round_to(x)
}

fn stage1_layer(sys: &FloatSystem, c: GadgetConstants) -> Layer {
    let mut l = Layer::zeros(sys, 6, 4);
    let (one, m_one) = (sys.one(), sys.neg(sys.one()));
    for u in 0..4 {
        l.wf1.set(sys, u, 1, c.m);
    }
    l.wf1.set(sys, 2, 0, c.k);
    l.wf1.set(sys, 3, 0, c.k);
    l.bf1[1] = m_one;
    l.bf1[2] = sys.neg(c.k);
    l.bf1[3] = f(sys, -(sys.value(c.k) + 1.0));
    for (row, sign) in [(2, false), (3, true), (4, false), (5, true)] {
        let base = if row < 4 { 0 } else { 2 };
        l.wf2.set(sys, row, base, if sign { m_one } else { one });
        l.wf2.set(sys, row, base + 1, if sign { one } else { m_one });
    }
    l
}

fn stage2_layer(sys: &FloatSystem, c: GadgetConstants) -> Layer {
    let mut l = Layer::zeros(sys, 4, 2);
    let (one, m_one) = (sys.one(), sys.neg(sys.one()));
    for u in 0..2 {
        l.wf1.set(sys, u, 0, one);
        l.wf1.set(sys, u, 1, c.m);
    }
    l.bf1[1] = m_one;
    l.wf2.set(sys, 2, 0, one);
    l.wf2.set(sys, 2, 1, m_one);
    l.wf2.set(sys, 3, 0, m_one);
    l.wf2.set(sys, 3, 1, one);
    l
}

fn first_stage_ok(sys: &FloatSystem, c: GadgetConstants, domain: &[FVal]) -> bool {
    if !sys.represents(-(sys.value(c.k) + 1.0)) {
        return false;
    }
    let layer = stage1_layer(sys, c);
    let (zero, one) = (sys.zero(), sys.one());
    for &d1 in &[zero, one] {
        for &o in domain {
            let bin = !sys.is_zero(o);
            let both = bin && d1 == one;
            let Ok(y) = apply_ffn(sys, &layer, &[d1, o, zero, zero, zero, zero]) else { return false };
            let want = |b: bool| if b { one } else { zero };
            if y[2] != want(bin) || y[3] != sys.neg(want(bin)) || y[4] != want(both) || y[5] != sys.neg(want(both)) {
                return false;
            }
        }
    }
    true
}

fn second_stage_ok(sys: &FloatSystem, c: GadgetConstants, domain: &[FVal]) -> bool {
    let layer = stage2_layer(sys, c);
    let (zero, one) = (sys.zero(), sys.one());
    for &b in &[zero, one] {
        for &o in domain {
            let want = if b == one || !sys.is_zero(o) { one } else { zero };
            let Ok(y) = apply_ffn(sys, &layer, &[b, o, zero, zero]) else { return false };
            if y[2] != want || y[3] != sys.neg(want) {
                return false;
            }
        }
    }
    true
}

/// Smallest constants (in value order) for which both gadget feedforward
/// stages are exact on every reachable input.
pub fn gadget_constants(sys: &FloatSystem) -> Result<GadgetConstants, CompileError> {
    let mut domain = vec![sys.zero()];
    domain.extend(uniform_attention_values(sys)?);
    let positives: Vec<FVal> = sys.elements().filter(|&v| sys.value(v) > 0.0 && sys.value(v).is_finite()).collect();
    for &m in &positives {
        if !second_stage_ok(sys, GadgetConstants { m, k: m }, &domain) {
            continue;
        }
        for &k in &positives {
            let c = GadgetConstants { m, k };
            if first_stage_ok(sys, c, &domain) {
                return Ok(c);
            }
        }
    }
    Err(CompileError::Unsuitable("no exact constants for the past gadget".into()))
}

/// Largest `k ≤ MAX_FAN_IN` with all integers in `-k..=k` representable.
fn exact_integer_range(sys: &FloatSystem) -> usize {
    (1..=MAX_FAN_IN).take_while(|&k| sys.represents(k as f64) && sys.represents(-(k as f64))).last().unwrap_or(0)
}

/// Hash-consed DAG of several formulas; returns the node id of each root.
pub(crate) fn dag_with_roots(roots: &[Arc<Ltl>], alphabet: &Alphabet) -> Result<(LtlDag, Vec<usize>), CompileError> {
    assert!(!roots.is_empty());
    let dag = LtlDag::build(&Ltl::and_all(roots.iter().cloned()), alphabet)?;
    let mut ids = Vec::with_capacity(roots.len());
    let mut cur = dag.root;
    for _ in 1..roots.len() {
        let Node::And(l, r) = dag.nodes[cur] else { unreachable!("spine of and_all") };
        ids.push(r);
        cur = l;
    }
    ids.push(cur);
    ids.reverse();
    Ok((dag, ids))
}

/// Incremental circuit layout for one spec.
pub(crate) struct Circuit<'a> {
    sys: FloatSystem,
    alphabet: Alphabet,
    dag: &'a LtlDag,
    fan_in: usize,
    constants: Option<GadgetConstants>,
    slots: Vec<Slot>,
    gates: Vec<Gate>,
    pasts: Vec<Past>,
    attn_used: Vec<bool>,
    forms: HashMap<usize, Form>,
    conj_slot: HashMap<Vec<Lit>, usize>,
    past_slot: HashMap<usize, usize>,
    bias: usize,
    eos: usize,
}

const LABEL_LIMIT: usize = 32;

impl<'a> Circuit<'a> {
    pub(crate) fn new(dag: &'a LtlDag, sys: &FloatSystem) -> Result<Self, CompileError> {
        for x in [1.0, -1.0] {
            if !sys.represents(x) {
                return Err(CompileError::Unsuitable(format!("{x} is not representable")));
            }
        }
        let alphabet = dag.alphabet.clone();
        let mut slots: Vec<Slot> =
            alphabet.symbols().iter().map(|s| Slot { kind: DimKind::Symbol, label: s.clone(), ready: 0 }).collect();
        let eos = slots.len();
        slots.push(Slot { kind: DimKind::Symbol, label: crate::transformer::EOS.into(), ready: 0 });
        let bias = slots.len();
        slots.push(Slot { kind: DimKind::Bias, label: "1".into(), ready: 0 });
        Ok(Circuit {
            sys: sys.clone(),
            alphabet,
            dag,
            fan_in: exact_integer_range(sys),
            constants: None,
            slots,
            gates: Vec::new(),
            pasts: Vec::new(),
            attn_used: vec![false],
            forms: HashMap::new(),
            conj_slot: HashMap::new(),
            past_slot: HashMap::new(),
            bias,
            eos,
        })
    }

    fn new_slot(&mut self, kind: DimKind, label: String, ready: usize) -> usize {
        self.slots.push(Slot { kind, label, ready });
        self.slots.len() - 1
    }

    fn slot_ref(&self, s: usize) -> String {
        let l = &self.slots[s].label;
        if l.chars().count() <= LABEL_LIMIT {
            l.clone()
        } else {
            format!("@{}", 2 * s)
        }
    }

    fn lit_label(&self, l: Lit) -> String {
        let base = if l.slot == self.bias { "true".to_string() } else { self.slot_ref(l.slot) };
        match (l.neg, l.slot == self.bias) {
            (true, true) => "false".into(),
            (true, false) => format!("!{base}"),
            _ => base,
        }
    }

    fn normalize(&self, neg: bool, lits: Vec<Lit>) -> Form {
        let t = Lit { slot: self.bias, neg: false };
        let mut out: Vec<Lit> = Vec::new();
        for l in lits {
            if l == t || out.contains(&l) {
                continue;
            }
            if l == t.flip() || out.contains(&l.flip()) {
                return Form::Lit(Lit { slot: self.bias, neg: !neg });
            }
            out.push(l);
        }
        match out.len() {
            0 => Form::Lit(Lit { slot: self.bias, neg }),
            1 => Form::Lit(Lit { slot: out[0].slot, neg: out[0].neg ^ neg }),
            _ => Form::Conj { neg, lits: out },
        }
    }

    /// Materializes `⋀lits` in a fresh (or shared) slot.
    fn conj(&mut self, mut lits: Vec<Lit>) -> Result<usize, CompileError> {
        lits.sort();
        if let Some(&s) = self.conj_slot.get(&lits) {
            return Ok(s);
        }
        if lits.len() > self.fan_in {
            return Err(CompileError::Unsuitable(format!(
                "a {}-literal conjunction needs exact integers -{0}..{0}",
                lits.len()
            )));
        }
        let layer = lits.iter().map(|l| self.slots[l.slot].ready).max().unwrap_or(0) + 1;
        let label = lits.iter().map(|&l| self.lit_label(l)).collect::<Vec<_>>().join(" & ");
        let s = self.new_slot(DimKind::Formula, label, layer);
        self.gates.push(Gate { layer, out: s, lits: lits.clone() });
        self.conj_slot.insert(lits, s);
        Ok(s)
    }

    fn lit_of(&mut self, id: usize) -> Result<Lit, CompileError> {
        match self.form(id)? {
            Form::Lit(l) => Ok(l),
            Form::Conj { neg, lits } => Ok(Lit { slot: self.conj(lits)?, neg }),
        }
    }

    /// Literals whose conjunction is `x` (or `¬x`), expanded when possible.
    fn conj_lits(&mut self, id: usize, negate: bool) -> Result<Vec<Lit>, CompileError> {
        match self.form(id)? {
            Form::Conj { neg, lits } if neg == negate => Ok(lits),
            _ => {
                let l = self.lit_of(id)?;
                Ok(vec![if negate { l.flip() } else { l }])
            }
        }
    }

    fn binary(&mut self, a: usize, b: usize, negate: bool) -> Result<Form, CompileError> {
        let mut la = self.conj_lits(a, negate)?;
        let mut lb = self.conj_lits(b, negate)?;
        let single = |c: &mut Self, id: usize| -> Result<Vec<Lit>, CompileError> {
            let l = c.lit_of(id)?;
            Ok(vec![if negate { l.flip() } else { l }])
        };
        if la.len() + lb.len() > self.fan_in.max(2) {
            if la.len() >= lb.len() {
                la = single(self, a)?;
            } else {
                lb = single(self, b)?;
            }
        }
        if la.len() + lb.len() > self.fan_in.max(2) {
            if la.len() > 1 {
                la = single(self, a)?;
            }
            if lb.len() > 1 {
                lb = single(self, b)?;
            }
        }
        la.extend(lb);
        Ok(self.normalize(negate, la))
    }

    fn form(&mut self, id: usize) -> Result<Form, CompileError> {
        if let Some(f) = self.forms.get(&id) {
            return Ok(f.clone());
        }
        let form = match self.dag.nodes[id] {
            Node::Atom(s) => Form::Lit(Lit { slot: s, neg: false }),
            Node::True => Form::Lit(Lit { slot: self.bias, neg: false }),
            Node::False => Form::Lit(Lit { slot: self.bias, neg: true }),
            Node::Not(a) => match self.form(a)? {
                Form::Lit(l) => Form::Lit(l.flip()),
                Form::Conj { neg, lits } => Form::Conj { neg: !neg, lits },
            },
            Node::And(a, b) => self.binary(a, b, false)?,
            Node::Or(a, b) => self.binary(a, b, true)?,
            Node::Past(a) => {
                let d1 = self.positive_slot(a)?;
                Form::Lit(Lit { slot: self.past(d1)?, neg: false })
            }
            Node::Future(_) | Node::Since(..) | Node::Until(..) => return Err(CompileError::NotPtl),
        };
        self.forms.insert(id, form.clone());
        Ok(form)
    }

    /// A slot holding node `id` positively (never the bias slot).
    pub(crate) fn positive_slot(&mut self, id: usize) -> Result<usize, CompileError> {
        match self.form(id)? {
            Form::Lit(l) if !l.neg && l.slot != self.bias => Ok(l.slot),
            Form::Lit(l) => self.conj(vec![l]),
            Form::Conj { neg: false, lits } => self.conj(lits),
            Form::Conj { neg: true, lits } => {
                let c = self.conj(lits)?;
                self.conj(vec![Lit { slot: c, neg: true }])
            }
        }
    }

    fn free_attention_layer(&mut self, min: usize) -> usize {
        let mut l = min;
        loop {
            if l >= self.attn_used.len() {
                self.attn_used.resize(l + 1, false);
            }
            if !self.attn_used[l] {
                self.attn_used[l] = true;
                return l;
            }
            l += 1;
        }
    }

    fn past(&mut self, d1: usize) -> Result<usize, CompileError> {
        if let Some(&s) = self.past_slot.get(&d1) {
            return Ok(s);
        }
        if self.constants.is_none() {
            self.constants = Some(gadget_constants(&self.sys)?);
        }
        let l1 = self.free_attention_layer(self.slots[d1].ready + 1);
        let l2 = self.free_attention_layer(l1 + 1);
        let name = format!("P {}", self.lit_label(Lit { slot: d1, neg: false }));
        let d2_raw = self.new_slot(DimKind::Scratch, format!("d2'({name})"), l1);
        let d2_bin = self.new_slot(DimKind::Formula, format!("d2'bin({name})"), l1);
        let d2 = self.new_slot(DimKind::Formula, format!("d2({name})"), l1);
        let d3_raw = self.new_slot(DimKind::Scratch, format!("d3'({name})"), l2);
        let d3 = self.new_slot(DimKind::Formula, name, l2);
        self.pasts.push(Past { l1, l2, d1, d2_raw, d2_bin, d2, d3_raw, d3 });
        self.past_slot.insert(d1, d3);
        Ok(d3)
    }

    /// Emits the embedding, layers and dimension map.
    pub(crate) fn finish(self) -> Result<Assembled, CompileError> {
        let sys = &self.sys;
        let d = 2 * self.slots.len();
        let max_gate = self.gates.iter().map(|g| g.layer).max().unwrap_or(0);
        let max_attn = self.attn_used.len().saturating_sub(1);
        let n_layers = max_gate.max(max_attn).max(1);
        let mut units = vec![0usize; n_layers + 1];
        for g in &self.gates {
            units[g.layer] += 1;
        }
        for p in &self.pasts {
            units[p.l1] += 4;
            units[p.l2] += 2;
        }
        let d_ff = units.iter().copied().max().unwrap_or(0).max(1);
        if !self.pasts.is_empty() {
            let r = sys.round_to((d as f64).sqrt());
            if !sys.value(r).is_finite() || sys.is_zero(r) {
                return Err(CompileError::Unsuitable(format!("sqrt({d}) is not a finite nonzero value")));
            }
        }
        let (one, m_one, inf) = (sys.one(), sys.neg(sys.one()), sys.pos_inf());
        let p = |s: usize| 2 * s;
        let mut layers: Vec<Layer> = (0..n_layers).map(|_| Layer::zeros(sys, d, d_ff)).collect();
        let mut next_unit = vec![0usize; n_layers + 1];
        let mut alloc = |l: usize| {
            let u = next_unit[l];
            next_unit[l] += 1;
            u
        };
        let write_out = |layer: &mut Layer, slot: usize, pos: usize, negu: usize| {
            layer.wf2.set(sys, p(slot), pos, one);
            layer.wf2.set(sys, p(slot) + 1, pos, m_one);
            layer.wf2.set(sys, p(slot), negu, m_one);
            layer.wf2.set(sys, p(slot) + 1, negu, one);
        };
        for g in &self.gates {
            let layer = &mut layers[g.layer - 1];
            let u = alloc(g.layer);
            let k = g.lits.len() as f64;
            let negs = g.lits.iter().filter(|l| l.neg).count() as f64;
            for l in &g.lits {
                layer.wf1.set(sys, u, p(l.slot), if l.neg { m_one } else { one });
            }
            layer.bf1[u] = f(sys, negs - (k - 1.0));
            layer.wf2.set(sys, p(g.out), u, one);
            layer.wf2.set(sys, p(g.out) + 1, u, m_one);
        }
        let c = self.constants;
        for past in &self.pasts {
            let c = c.expect("constants chosen with the first gadget");
            let b = p(self.bias);
            for (l, src, dst) in [(past.l1, past.d1, past.d2_raw), (past.l2, past.d2, past.d3_raw)] {
                let layer = &mut layers[l - 1];
                layer.wq.set(sys, p(src), b, inf);
                layer.wk.set(sys, p(src), p(src), one);
                layer.wk.set(sys, p(src), b, m_one);
                layer.wv.set(sys, p(dst), p(src), one);
                layer.wv.set(sys, p(dst) + 1, p(src), m_one);
            }
            // first stage: d2'bin = [o ≠ 0], d2 = d1 ∧ [o ≠ 0]
            let layer = &mut layers[past.l1 - 1];
            let u: Vec<usize> = (0..4).map(|_| alloc(past.l1)).collect();
            for &ui in &u {
                layer.wf1.set(sys, ui, p(past.d2_raw), c.m);
            }
            layer.wf1.set(sys, u[2], p(past.d1), c.k);
            layer.wf1.set(sys, u[3], p(past.d1), c.k);
            layer.bf1[u[1]] = m_one;
            layer.bf1[u[2]] = sys.neg(c.k);
            layer.bf1[u[3]] = f(sys, -(sys.value(c.k) + 1.0));
            write_out(layer, past.d2_bin, u[0], u[1]);
            write_out(layer, past.d2, u[2], u[3]);
            // second stage: d3 = d2'bin ∨ [o3 ≠ 0]
            let layer = &mut layers[past.l2 - 1];
            let u: Vec<usize> = (0..2).map(|_| alloc(past.l2)).collect();
            for &ui in &u {
                layer.wf1.set(sys, ui, p(past.d2_bin), one);
                layer.wf1.set(sys, ui, p(past.d3_raw), c.m);
            }
            layer.bf1[u[1]] = m_one;
            write_out(layer, past.d3, u[0], u[1]);
        }
        let mut embedding = vec![vec![sys.zero(); d]; self.alphabet.len() + 1];
        for (row, e) in embedding.iter_mut().enumerate() {
            let sym = if row < self.alphabet.len() { row } else { self.eos };
            for s in [sym, self.bias] {
                e[p(s)] = one;
                e[p(s) + 1] = m_one;
            }
        }
        let dimension_map = self
            .slots
            .iter()
            .enumerate()
            .flat_map(|(s, slot)| {
                [
                    DimInfo { dim: p(s), kind: slot.kind.clone(), label: slot.label.clone() },
                    DimInfo { dim: p(s) + 1, kind: DimKind::Mirror, label: format!("-({})", slot.label) },
                ]
            })
            .collect();
        Ok(Assembled { d, d_ff, embedding, layers, dimension_map })
    }

    pub(crate) fn system(&self) -> &FloatSystem {
        &self.sys
    }
}

pub(crate) struct Assembled {
    pub d: usize,
    pub d_ff: usize,
    pub embedding: Vec<Vec<FVal>>,
    pub layers: Vec<Layer>,
    pub dimension_map: Vec<DimInfo>,
}

/// Compiles a PTL formula into a strictly masked soft-attention recognizer
/// that accepts `w` iff `w ⊨ φ` at position `|w| + 1`.
pub fn ptl_to_transformer(phi: &Ltl, alphabet: &Alphabet, sys: &FloatSystem) -> Result<TransformerSpec, CompileError> {
    if !phi.is_ptl() {
        return Err(CompileError::NotPtl);
    }
    let (dag, roots) = dag_with_roots(&[Arc::new(phi.clone())], alphabet)?;
    let mut circuit = Circuit::new(&dag, sys)?;
    let root = circuit.positive_slot(roots[0])?;
    let sys = circuit.system().clone();
    let a = circuit.finish()?;
    let mut theta = vec![sys.zero(); a.d];
    theta[2 * root] = sys.one();
    let spec = TransformerSpec {
        system: sys.clone(),
        alphabet: alphabet.clone(),
        d_model: a.d,
        d_ff: a.d_ff,
        embedding: a.embedding,
        layers: a.layers,
        ln_mode: LnMode::Identity,
        attention_mode: AttentionMode::Soft,
        masking: Masking::Strict,
        head: Head::Classifier { theta, bias: sys.round_to(-0.5) },
        dimension_map: a.dimension_map,
    };
    spec.validate()?;
    Ok(spec)
}

/// The dimension whose label is exactly `label`, if any.
pub fn find_dim(spec: &TransformerSpec, label: &str) -> Option<usize> {
    spec.dimension_map.iter().find(|d| d.label == label).map(|d| d.dim)
}
