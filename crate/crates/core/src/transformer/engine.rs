use serde::Serialize;

use crate::alphabet::Sym;
use crate::fixedfloat::{FVal, Fast, FloatError, FloatSystem};

use super::spec::{AttentionMode, Head, Layer, LnMode, Masking, Matrix, TransformerSpec};
use super::TransformerError;

/// Activations `X^(0), X^(0.5), …, X^(L)`, each indexed `[position][dim]`
/// with positions `1..=N+1` stored at `0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationTrace {
    pub sublayers: Vec<Vec<Vec<FVal>>>,
}

impl ActivationTrace {
    /// Number of positions, including `EOS`.
    pub fn len(&self) -> usize {
        self.sublayers[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The half-layer label of sublayer index `h`, e.g. `"1.5"`.
    pub fn label(h: usize) -> String {
        if h % 2 == 0 {
            format!("{}", h / 2)
        } else {
            format!("{}.5", h / 2)
        }
    }

    /// Column `n` (1-based) of `X^(h/2)`.
    pub fn column(&self, h: usize, n: usize) -> &[FVal] {
        &self.sublayers[h][n - 1]
    }

    /// Final-layer column at `n` (1-based).
    pub fn output(&self, n: usize) -> &[FVal] {
        self.column(self.sublayers.len() - 1, n)
    }

    /// Renders as `{label: [[value per dim] per position]}` in order.
    pub fn to_json(&self, sys: &FloatSystem) -> serde_json::Value {
        #[derive(Serialize)]
        struct Entry {
            layer: String,
            columns: Vec<Vec<String>>,
        }
        let entries: Vec<Entry> = self
            .sublayers
            .iter()
            .enumerate()
            .map(|(h, x)| Entry {
                layer: Self::label(h),
                columns: x.iter().map(|col| col.iter().map(|&v| sys.format(v)).collect()).collect(),
            })
            .collect();
        serde_json::to_value(entries).expect("trace serialization cannot fail")
    }
}

/// Concatenation of `X^(0.5) … X^(L)` at position `n` (1-based).
pub fn representation_concat(trace: &ActivationTrace, n: usize) -> Result<Vec<FVal>, TransformerError> {
    if n == 0 || n > trace.len() {
        return Err(TransformerError::Position(n, trace.len()));
    }
    Ok(trace.sublayers[1..].iter().flat_map(|x| x[n - 1].iter().copied()).collect())
}

/// Next-symbol distribution over Σ, `EOS`, `UNK`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NextDistribution {
    pub symbols: Vec<String>,
    pub probs: Vec<FVal>,
}

impl NextDistribution {
    pub fn prob(&self, symbol: &str) -> Option<FVal> {
        self.symbols.iter().position(|s| s == symbol).map(|i| self.probs[i])
    }

    /// Symbols with nonzero probability.
    pub fn support(&self, sys: &FloatSystem) -> Vec<&str> {
        self.symbols.iter().zip(&self.probs).filter(|(_, &p)| !sys.is_zero(p)).map(|(s, _)| s.as_str()).collect()
    }
}

/// Where an arithmetic failure happened; rendered only on error.
#[derive(Clone, Copy)]
enum Locus {
    Attn(usize),
    Ffn(usize),
    Head,
}

impl Locus {
    fn label(self) -> String {
        match self {
            Locus::Attn(l) => format!("{l}.5"),
            Locus::Ffn(l) => format!("{}", l + 1),
            Locus::Head => "head".into(),
        }
    }
}

fn err(locus: Locus, position: usize, dim: usize) -> impl FnOnce(FloatError) -> TransformerError {
    move |source| TransformerError::Arithmetic { layer: locus.label(), position, dim, source }
}

/// Affine map `W·x + b` with the bias added after the accumulated dot product.
fn affine(sys: &FloatSystem, w: &Matrix, b: &[FVal], x: &[FVal]) -> Result<Vec<FVal>, (usize, FloatError)> {
    let mut y = w.mul_vec(sys, x)?;
    for (r, (yr, &br)) in y.iter_mut().zip(b).enumerate() {
        *yr = sys.add(*yr, br).map_err(|e| (r, e))?;
    }
    Ok(y)
}

/// Residual feedforward `x + W_F2·ReLU(W_F1·x + b_F1) + b_F2`, before layer norm.
pub fn apply_ffn(sys: &FloatSystem, layer: &Layer, x: &[FVal]) -> Result<Vec<FVal>, (usize, FloatError)> {
    let h: Vec<FVal> = affine(sys, &layer.wf1, &layer.bf1, x)?.into_iter().map(|v| sys.relu(v)).collect();
    let out = affine(sys, &layer.wf2, &layer.bf2, &h)?;
    x.iter().zip(out).enumerate().map(|(i, (&a, b))| sys.add(a, b).map_err(|e| (i, e))).collect()
}

fn layer_norm(sys: &FloatSystem, mode: &LnMode, x: Vec<FVal>) -> Result<Vec<FVal>, (usize, FloatError)> {
    let LnMode::Standard { eps, gamma, beta } = mode else {
        return Ok(x);
    };
    let d = sys.round_to(x.len() as f64);
    let mean = sys.div(sys.sum(x.iter().copied()).map_err(|e| (0, e))?, d).map_err(|e| (0, e))?;
    let centered = x.iter().map(|&v| sys.sub(v, mean)).collect::<Result<Vec<_>, _>>().map_err(|e| (0, e))?;
    let var = sys.div(sys.dot(centered.iter().map(|&c| (c, c))).map_err(|e| (0, e))?, d).map_err(|e| (0, e))?;
    let denom = sys.sqrt(sys.add(var, *eps).map_err(|e| (0, e))?).map_err(|e| (0, e))?;
    centered
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let y = sys.mul(sys.div(c, denom)?, gamma[i])?;
            sys.add(y, beta[i])
        })
        .map(|r| r.map_err(|e| (0, e)))
        .collect()
}

/// Attention weights over the candidate scores, per mode, into `out`.
fn weights_into(
    sys: &FloatSystem,
    ops: Fast<'_>,
    mode: AttentionMode,
    scores: &[FVal],
    masked: &mut Vec<FVal>,
    out: &mut Vec<FVal>,
) -> Result<(), FloatError> {
    match mode {
        AttentionMode::Soft => ops.softmax_into(scores, out),
        AttentionMode::AverageHard => {
            let best = scores.iter().copied().max_by_key(|v| v.index()).expect("nonempty");
            masked.clear();
            masked.extend(scores.iter().map(|&s| if s == best { sys.zero() } else { sys.neg_inf() }));
            ops.softmax_into(masked, out)
        }
        AttentionMode::UniqueHard => {
            let best = scores.iter().copied().max_by_key(|v| v.index()).expect("nonempty");
            let pick = scores.iter().rposition(|&s| s == best).expect("nonempty");
            out.clear();
            out.extend((0..scores.len()).map(|m| if m == pick { sys.one() } else { sys.zero() }));
            Ok(())
        }
    }
}

type WeightLog = Vec<Vec<Vec<FVal>>>;

/// Rows that can be nonzero in each map of a layer, precomputed once.
#[derive(Debug, Clone)]
struct Plan {
    active: bool,
    /// Rows nonempty in both `W_Q` and `W_K`; only these contribute to scores.
    qk_rows: Vec<usize>,
    /// Nonempty rows of `W_K` and `W_Q`, with their slot in `qk_rows` if any.
    k_rows: Vec<(usize, Option<usize>)>,
    q_rows: Vec<(usize, Option<usize>)>,
    v_rows: Vec<usize>,
    /// FFN hidden rows with a weight or a nonzero bias.
    f1_rows: Vec<usize>,
    f2_rows: Vec<usize>,
}

impl Plan {
    fn of(sys: &FloatSystem, layer: &Layer) -> Self {
        let rows = |m: &Matrix, b: Option<&[FVal]>| {
            (0..m.rows).filter(|&r| !m.data[r].is_empty() || b.is_some_and(|b| !sys.is_zero(b[r]))).collect()
        };
        let q: Vec<usize> = rows(&layer.wq, None);
        let qk_rows: Vec<usize> = q.iter().copied().filter(|&r| !layer.wk.data[r].is_empty()).collect();
        let slot = |r: usize| qk_rows.binary_search(&r).ok();
        Plan {
            active: !(layer.wq.is_zero() && layer.wv.is_zero()),
            k_rows: rows(&layer.wk, None).into_iter().map(|r: usize| (r, slot(r))).collect(),
            q_rows: q.iter().map(|&r| (r, slot(r))).collect(),
            qk_rows,
            v_rows: rows(&layer.wv, None),
            f1_rows: rows(&layer.wf1, Some(&layer.bf1)),
            f2_rows: rows(&layer.wf2, Some(&layer.bf2)),
        }
    }
}

#[inline]
fn row_dot(ops: Fast<'_>, row: &[(usize, FVal)], x: &[FVal]) -> Result<FVal, FloatError> {
    ops.dot(row.iter().map(|&(c, w)| (w, x[c])))
}

/// Incremental evaluation: columns are appended one position at a time and
/// earlier columns are never revisited, which masking makes exact. Pushing
/// and popping lets enumerations share work across common prefixes.
///
/// Only rows that can be nonzero are computed; skipped updates are exact
/// additions of zero. A lean run keeps just the final-layer columns.
#[derive(Debug, Clone)]
pub struct Run<'a> {
    spec: &'a TransformerSpec,
    /// Unchecked arithmetic, enabled only for specs that validate.
    ops: Fast<'a>,
    sqrt_d: FVal,
    plans: Vec<Plan>,
    full: bool,
    /// `[sublayer][position][dim]`; only the last sublayer in a lean run.
    cols: Vec<Vec<Vec<FVal>>>,
    /// Per layer, flattened compact keys (`qk_rows`) and values (`v_rows`).
    keys: Vec<Vec<FVal>>,
    values: Vec<Vec<FVal>>,
    log: Option<WeightLog>,
    x: Vec<FVal>,
    hidden: Vec<FVal>,
    scratch: Vec<FVal>,
    query: Vec<(usize, FVal)>,
    scores: Vec<FVal>,
    masked: Vec<FVal>,
    alpha: Vec<FVal>,
}

impl<'a> Run<'a> {
    pub fn new(spec: &'a TransformerSpec) -> Self {
        let sys = &spec.system;
        let n = spec.layers.len();
        Run {
            spec,
            ops: if spec.validate().is_ok() { sys.fast() } else { sys.checked() },
            sqrt_d: sys.round_to((spec.d_model as f64).sqrt()),
            plans: spec.layers.iter().map(|l| Plan::of(sys, l)).collect(),
            full: true,
            cols: vec![Vec::new(); 2 * n + 1],
            keys: vec![Vec::new(); n],
            values: vec![Vec::new(); n],
            log: None,
            x: Vec::with_capacity(spec.d_model),
            hidden: vec![sys.zero(); spec.d_ff],
            scratch: Vec::new(),
            query: Vec::new(),
            scores: Vec::new(),
            masked: Vec::new(),
            alpha: Vec::new(),
        }
    }

    /// A run that stores only final-layer columns; [`Run::column`] is then
    /// limited to the last sublayer.
    pub fn lean(spec: &'a TransformerSpec) -> Self {
        Run { full: false, ..Self::new(spec) }
    }

    /// Also records attention weights per layer and position.
    pub fn with_weight_log(mut self) -> Self {
        self.log = Some(vec![Vec::new(); self.spec.layers.len()]);
        self
    }

    pub fn spec(&self) -> &'a TransformerSpec {
        self.spec
    }

    /// Number of positions computed so far.
    pub fn len(&self) -> usize {
        self.cols[self.cols.len() - 1].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends a symbol (`|Σ|` is `EOS`) and computes its column at every sublayer.
    pub fn push(&mut self, sym: Sym) -> Result<(), TransformerError> {
        let spec = self.spec;
        if sym > spec.alphabet.len() {
            return Err(TransformerError::Shape(format!("symbol index {sym} outside the alphabet")));
        }
        let p = self.len();
        let result = self.push_inner(sym);
        if result.is_err() {
            self.truncate_to(p);
        }
        result
    }

    fn record(&mut self, h: usize) {
        if self.full || h == self.cols.len() - 1 {
            self.cols[h].push(self.x.clone());
        }
    }

    fn push_inner(&mut self, sym: Sym) -> Result<(), TransformerError> {
        let spec = self.spec;
        let sys = &spec.system;
        let ops = self.ops;
        let p = self.len();
        let pos = p + 1;
        let end = match spec.masking {
            Masking::Strict => p,
            Masking::NonStrict => p + 1,
        };
        self.x.clear();
        self.x.extend_from_slice(&spec.embedding[sym]);
        self.record(0);
        for (l, layer) in spec.layers.iter().enumerate() {
            let plan = &self.plans[l];
            let e_attn = |i| err(Locus::Attn(l), pos, i);
            self.scratch.clear();
            self.alpha.clear();
            if plan.active {
                let (nk, nv) = (plan.qk_rows.len(), plan.v_rows.len());
                // every nonempty row is evaluated so failures surface in row
                // order; only keys and queries that can meet are kept
                for &(r, slot) in &plan.k_rows {
                    let k = row_dot(ops, &layer.wk.data[r], &self.x).map_err(e_attn(r))?;
                    if slot.is_some() {
                        self.keys[l].push(k);
                    }
                }
                for &r in &plan.v_rows {
                    let v = row_dot(ops, &layer.wv.data[r], &self.x).map_err(e_attn(r))?;
                    self.values[l].push(v);
                }
                self.query.clear();
                for &(r, slot) in &plan.q_rows {
                    let v = row_dot(ops, &layer.wq.data[r], &self.x).map_err(e_attn(r))?;
                    if let Some(j) = slot {
                        self.query.push((j, v));
                    }
                }
                if end > 0 {
                    let keys = &self.keys[l];
                    self.scores.clear();
                    for m in 0..end {
                        let km = &keys[m * nk..(m + 1) * nk];
                        let dot = ops.dot(self.query.iter().map(|&(j, v)| (v, km[j]))).map_err(e_attn(0))?;
                        self.scores.push(ops.div(dot, self.sqrt_d).map_err(e_attn(0))?);
                    }
                    weights_into(sys, ops, spec.attention_mode, &self.scores, &mut self.masked, &mut self.alpha)
                        .map_err(e_attn(0))?;
                    let values = &self.values[l];
                    for (j, &i) in plan.v_rows.iter().enumerate() {
                        let o = sys
                            .dot(self.alpha.iter().enumerate().map(|(m, &a)| (a, values[m * nv + j])))
                            .map_err(e_attn(i))?;
                        self.scratch.push(o);
                    }
                }
            } else if self.log.is_some() && end > 0 {
                self.scores.clear();
                self.scores.resize(end, sys.zero());
                weights_into(sys, ops, spec.attention_mode, &self.scores, &mut self.masked, &mut self.alpha)
                    .map_err(e_attn(0))?;
            }
            if let Some(log) = self.log.as_mut() {
                log[l].push(self.alpha.clone());
            }
            for (&i, &o) in plan.v_rows.iter().zip(&self.scratch) {
                self.x[i] = ops.add(self.x[i], o).map_err(e_attn(i))?;
            }
            if let LnMode::Standard { .. } = spec.ln_mode {
                self.x = layer_norm(sys, &spec.ln_mode, std::mem::take(&mut self.x)).map_err(|(i, e)| e_attn(i)(e))?;
            }
            self.record(2 * l + 1);
            self.ffn(l)?;
            self.record(2 * l + 2);
        }
        Ok(())
    }

    fn ffn(&mut self, l: usize) -> Result<(), TransformerError> {
        let spec = self.spec;
        let sys = &spec.system;
        let ops = self.ops;
        let (layer, plan) = (&spec.layers[l], &self.plans[l]);
        let pos = self.cols[self.cols.len() - 1].len() + 1;
        let e = |i| err(Locus::Ffn(l), pos, i);
        for &r in &plan.f1_rows {
            let y = row_dot(ops, &layer.wf1.data[r], &self.x).map_err(e(r))?;
            let y = ops.add(y, layer.bf1[r]).map_err(e(r))?;
            self.hidden[r] = sys.relu(y);
        }
        self.scratch.clear();
        let mut failure = None;
        for &r in &plan.f2_rows {
            match row_dot(ops, &layer.wf2.data[r], &self.hidden).and_then(|y| ops.add(y, layer.bf2[r])) {
                Ok(y) => self.scratch.push(y),
                Err(source) => {
                    failure = Some(e(r)(source));
                    break;
                }
            }
        }
        for &r in &plan.f1_rows {
            self.hidden[r] = sys.zero();
        }
        if let Some(f) = failure {
            return Err(f);
        }
        for (&i, &o) in plan.f2_rows.iter().zip(&self.scratch) {
            self.x[i] = ops.add(self.x[i], o).map_err(e(i))?;
        }
        if let LnMode::Standard { .. } = spec.ln_mode {
            self.x = layer_norm(sys, &spec.ln_mode, std::mem::take(&mut self.x)).map_err(|(i, er)| e(i)(er))?;
        }
        Ok(())
    }

    /// Drops every position from index `n` on.
    fn truncate_to(&mut self, n: usize) {
        for c in &mut self.cols {
            c.truncate(n);
        }
        for (l, plan) in self.plans.iter().enumerate() {
            if plan.active {
                self.keys[l].truncate(n * plan.qk_rows.len());
                self.values[l].truncate(n * plan.v_rows.len());
            }
        }
        if let Some(log) = self.log.as_mut() {
            for r in log {
                r.truncate(n);
            }
        }
    }

    /// Removes the last position.
    pub fn pop(&mut self) {
        if let Some(n) = self.len().checked_sub(1) {
            self.truncate_to(n);
        }
    }

    /// Column `n` (1-based) of `X^(h/2)`.
    ///
    /// # Panics
    /// In a lean run, for any sublayer but the last.
    pub fn column(&self, h: usize, n: usize) -> &[FVal] {
        assert!(self.full || h == self.cols.len() - 1, "lean runs keep only the final sublayer");
        &self.cols[h][n - 1]
    }

    /// Final-layer column of the last position.
    pub fn last_output(&self) -> Option<&[FVal]> {
        self.cols.last().and_then(|c| c.last()).map(Vec::as_slice)
    }

    /// Classifier decision for the current prefix, evaluated at an appended `EOS`.
    pub fn accepts(&mut self) -> Result<bool, TransformerError> {
        self.push(self.spec.alphabet.len())?;
        let o = classifier_output(self.spec, self.last_output().expect("pushed"), self.len());
        self.pop();
        Ok(self.spec.system.value(o?) > 0.0)
    }

    /// Next-symbol distribution for the current prefix, read at an appended `EOS`.
    pub fn next_distribution(&mut self) -> Result<NextDistribution, TransformerError> {
        self.push(self.spec.alphabet.len())?;
        let d = lm_output(self.spec, self.last_output().expect("pushed"), self.len());
        self.pop();
        d
    }

    /// The activation trace of a full run.
    ///
    /// # Panics
    /// For a lean run.
    pub fn into_trace(self) -> ActivationTrace {
        assert!(self.full, "lean runs keep no trace");
        ActivationTrace { sublayers: self.cols }
    }

    pub fn weight_log(&self) -> Option<&WeightLog> {
        self.log.as_ref()
    }
}

fn check_word(spec: &TransformerSpec, w: &[Sym]) -> Result<(), TransformerError> {
    match w.iter().find(|&&s| s >= spec.alphabet.len()) {
        Some(s) => Err(TransformerError::Shape(format!("symbol index {s} outside the alphabet"))),
        None => Ok(()),
    }
}

/// A lean run over `w·EOS`.
fn lean_run<'a>(spec: &'a TransformerSpec, w: &[Sym]) -> Result<Run<'a>, TransformerError> {
    check_word(spec, w)?;
    let mut r = Run::lean(spec);
    for &s in w.iter().chain(std::iter::once(&spec.alphabet.len())) {
        r.push(s)?;
    }
    Ok(r)
}

fn run(spec: &TransformerSpec, w: &[Sym], log: Option<&mut WeightLog>) -> Result<ActivationTrace, TransformerError> {
    let eos = spec.alphabet.len();
    check_word(spec, w)?;
    let mut r = Run::new(spec);
    if log.is_some() {
        r = r.with_weight_log();
    }
    for &s in w.iter().chain(std::iter::once(&eos)) {
        r.push(s)?;
    }
    if let Some(log) = log {
        *log = r.log.take().expect("enabled");
    }
    Ok(r.into_trace())
}

/// Runs the spec on `w·EOS`.
pub fn forward_syms(spec: &TransformerSpec, w: &[Sym]) -> Result<ActivationTrace, TransformerError> {
    run(spec, w, None)
}

/// Runs the spec on a word written in its alphabet.
pub fn forward(spec: &TransformerSpec, w: &str) -> Result<ActivationTrace, TransformerError> {
    let syms = spec.alphabet.parse_word(w)?;
    forward_syms(spec, &syms)
}

/// Attention weights per layer and position, over the candidate positions
/// (empty for the first position under strict masking).
pub fn attention_weights(spec: &TransformerSpec, w: &[Sym]) -> Result<WeightLog, TransformerError> {
    let mut log = Vec::new();
    run(spec, w, Some(&mut log))?;
    Ok(log)
}

fn head_name(h: &Head) -> &'static str {
    match h {
        Head::Classifier { .. } => "classifier",
        Head::Lm { .. } => "language-model",
    }
}

fn classifier_output(spec: &TransformerSpec, x: &[FVal], n: usize) -> Result<FVal, TransformerError> {
    let Head::Classifier { theta, bias } = &spec.head else {
        return Err(TransformerError::HeadMismatch { found: head_name(&spec.head), needed: "classifier" });
    };
    let sys = &spec.system;
    let o = sys.dot(theta.iter().copied().zip(x.iter().copied())).map_err(err(Locus::Head, n, 0))?;
    sys.add(o, *bias).map_err(err(Locus::Head, n, 0))
}

fn lm_output(spec: &TransformerSpec, x: &[FVal], n: usize) -> Result<NextDistribution, TransformerError> {
    let Head::Lm { w, bias } = &spec.head else {
        return Err(TransformerError::HeadMismatch { found: head_name(&spec.head), needed: "language-model" });
    };
    let sys = &spec.system;
    let logits = affine(sys, w, bias, x).map_err(|(r, e)| err(Locus::Head, n, r)(e))?;
    let probs = sys.softmax(&logits).map_err(err(Locus::Head, n, 0))?;
    Ok(NextDistribution { symbols: spec.output_symbols(), probs })
}

fn check_head(spec: &TransformerSpec, classifier: bool) -> Result<(), TransformerError> {
    match (&spec.head, classifier) {
        (Head::Classifier { .. }, true) | (Head::Lm { .. }, false) => Ok(()),
        (h, true) => Err(TransformerError::HeadMismatch { found: head_name(h), needed: "classifier" }),
        (h, false) => Err(TransformerError::HeadMismatch { found: head_name(h), needed: "language-model" }),
    }
}

/// `θ·X^(L)_{:,N+1} + b`.
pub fn classifier_score(spec: &TransformerSpec, w: &[Sym]) -> Result<FVal, TransformerError> {
    check_head(spec, true)?;
    let r = lean_run(spec, w)?;
    classifier_output(spec, r.last_output().expect("EOS pushed"), r.len())
}

/// Accepts iff the classifier score is strictly positive.
pub fn accept(spec: &TransformerSpec, w: &[Sym]) -> Result<bool, TransformerError> {
    let o = classifier_score(spec, w)?;
    Ok(spec.system.value(o) > 0.0)
}

/// Softmax of the LM logits read at the `EOS` column after `prefix`.
pub fn lm_next_distribution_syms(spec: &TransformerSpec, prefix: &[Sym]) -> Result<NextDistribution, TransformerError> {
    check_head(spec, false)?;
    let r = lean_run(spec, prefix)?;
    lm_output(spec, r.last_output().expect("EOS pushed"), r.len())
}

pub fn lm_next_distribution(spec: &TransformerSpec, prefix: &str) -> Result<NextDistribution, TransformerError> {
    let syms = spec.alphabet.parse_word(prefix)?;
    lm_next_distribution_syms(spec, &syms)
}

/// `∏ p(w_i | w_<i) · p(EOS | w)`, multiplied left to right.
pub fn lm_string_probability(spec: &TransformerSpec, w: &[Sym]) -> Result<FVal, TransformerError> {
    check_head(spec, false)?;
    let sys = &spec.system;
    let eos = spec.alphabet.len();
    check_word(spec, w)?;
    let mut run = Run::lean(spec);
    let mut acc = sys.one();
    for i in 0..=w.len() {
        let dist = run.next_distribution()?;
        let target = if i < w.len() { w[i] } else { eos };
        acc = sys.mul(acc, dist.probs[target]).map_err(err(Locus::Head, i + 1, target))?;
        if i < w.len() {
            run.push(w[i])?;
        }
    }
    Ok(acc)
}
