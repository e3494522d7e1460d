use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::fixedfloat::{parse_f64, FVal, FloatSystem};

use super::TransformerError;

/// Output symbol names beyond the input alphabet.
pub const EOS: &str = "EOS";
pub const UNK: &str = "UNK";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttentionMode {
    /// Soft attention (softmax of the scores).
    #[serde(rename = "SA")]
    Soft,
    /// Average hard attention: uniform over the maximal scores.
    #[serde(rename = "AHA")]
    AverageHard,
    /// Unique hard attention: the rightmost maximal score takes all weight.
    #[serde(rename = "UHA")]
    UniqueHard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Masking {
    /// Position `n` attends to `m < n`.
    Strict,
    /// Position `n` attends to `m ≤ n`.
    NonStrict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LnMode {
    Identity,
    Standard { eps: FVal, gamma: Vec<FVal>, beta: Vec<FVal> },
}

/// Sparse matrix with explicit shape; rows hold `(column, value)` pairs in
/// increasing column order and omit zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<(usize, FVal)>>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Vec::new(); rows] }
    }

    /// Sets an entry; zero values remove it.
    pub fn set(&mut self, sys: &FloatSystem, r: usize, c: usize, v: FVal) {
        assert!(r < self.rows && c < self.cols, "matrix index ({r}, {c}) out of {}x{}", self.rows, self.cols);
        let row = &mut self.data[r];
        let pos = row.partition_point(|&(j, _)| j < c);
        let present = pos < row.len() && row[pos].0 == c;
        match (present, sys.is_zero(v)) {
            (true, true) => {
                row.remove(pos);
            }
            (true, false) => row[pos].1 = v,
            (false, false) => row.insert(pos, (c, v)),
            (false, true) => {}
        }
    }

    pub fn get(&self, sys: &FloatSystem, r: usize, c: usize) -> FVal {
        self.data[r].iter().find(|&&(j, _)| j == c).map(|&(_, v)| v).unwrap_or_else(|| sys.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    /// Grows the shape, keeping entries.
    pub fn resize(&mut self, rows: usize, cols: usize) {
        self.data.resize(rows, Vec::new());
        self.rows = rows;
        self.cols = cols;
    }

    /// `y_r = Σ_c M[r][c]·x[c]` accumulated left to right; on failure returns the row.
    pub fn mul_vec(&self, sys: &FloatSystem, x: &[FVal]) -> Result<Vec<FVal>, (usize, crate::FloatError)> {
        self.data
            .iter()
            .enumerate()
            .map(|(r, row)| sys.dot(row.iter().map(|&(c, w)| (w, x[c]))).map_err(|e| (r, e)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wf1: Matrix,
    pub bf1: Vec<FVal>,
    pub wf2: Matrix,
    pub bf2: Vec<FVal>,
}

impl Layer {
    pub fn zeros(sys: &FloatSystem, d: usize, d_ff: usize) -> Self {
        Layer {
            wq: Matrix::zeros(d, d),
            wk: Matrix::zeros(d, d),
            wv: Matrix::zeros(d, d),
            wf1: Matrix::zeros(d_ff, d),
            bf1: vec![sys.zero(); d_ff],
            wf2: Matrix::zeros(d, d_ff),
            bf2: vec![sys.zero(); d],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    /// `o = θ·x + b`, accept iff `o > 0`.
    Classifier { theta: Vec<FVal>, bias: FVal },
    /// Logits `W·x + b` over the input symbols, `EOS` and `UNK`.
    Lm { w: Matrix, bias: Vec<FVal> },
}

/// Role of a hidden dimension in a compiled spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimKind {
    Symbol,
    Bias,
    Formula,
    /// Intermediate attention output; not restricted to {0, 1}.
    Scratch,
    Mirror,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimInfo {
    pub dim: usize,
    pub kind: DimKind,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformerSpec {
    pub system: FloatSystem,
    /// Input alphabet Σ; the embedding has one extra row for `EOS`.
    pub alphabet: Alphabet,
    pub d_model: usize,
    pub d_ff: usize,
    /// Rows indexed by symbol, then `EOS`.
    pub embedding: Vec<Vec<FVal>>,
    pub layers: Vec<Layer>,
    pub ln_mode: LnMode,
    pub attention_mode: AttentionMode,
    pub masking: Masking,
    pub head: Head,
    pub dimension_map: Vec<DimInfo>,
}

impl TransformerSpec {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Σ, `EOS`, `UNK` in head-row order.
    pub fn output_symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = self.alphabet.symbols().to_vec();
        out.push(EOS.into());
        out.push(UNK.into());
        out
    }

    /// Checks shapes and that every value belongs to the spec's system.
    pub fn validate(&self) -> Result<(), TransformerError> {
        let (d, f) = (self.d_model, self.d_ff);
        let bad = |what: String| Err(TransformerError::Shape(what));
        if self.embedding.len() != self.alphabet.len() + 1 {
            return bad(format!("embedding has {} rows, expected {}", self.embedding.len(), self.alphabet.len() + 1));
        }
        for (i, e) in self.embedding.iter().enumerate() {
            if e.len() != d {
                return bad(format!("embedding row {i} has length {}, expected {d}", e.len()));
            }
        }
        let check_m = |m: &Matrix, r: usize, c: usize, name: &str| -> Result<(), TransformerError> {
            if m.rows != r || m.cols != c || m.data.len() != r {
                return Err(TransformerError::Shape(format!("{name} is {}x{}, expected {r}x{c}", m.rows, m.cols)));
            }
            for row in &m.data {
                if row.iter().any(|&(j, v)| j >= c || !self.system.contains(v))
                    || row.windows(2).any(|p| p[0].0 >= p[1].0)
                {
                    return Err(TransformerError::Shape(format!("{name} has malformed entries")));
                }
            }
            Ok(())
        };
        for (l, layer) in self.layers.iter().enumerate() {
            check_m(&layer.wq, d, d, &format!("layer {l} W_Q"))?;
            check_m(&layer.wk, d, d, &format!("layer {l} W_K"))?;
            check_m(&layer.wv, d, d, &format!("layer {l} W_V"))?;
            check_m(&layer.wf1, f, d, &format!("layer {l} W_F1"))?;
            check_m(&layer.wf2, d, f, &format!("layer {l} W_F2"))?;
            if layer.bf1.len() != f || layer.bf2.len() != d {
                return bad(format!("layer {l} bias lengths"));
            }
        }
        if let LnMode::Standard { gamma, beta, .. } = &self.ln_mode {
            if gamma.len() != d || beta.len() != d {
                return bad("layer-norm parameter lengths".into());
            }
        }
        match &self.head {
            Head::Classifier { theta, .. } if theta.len() != d => bad("classifier length".into()),
            Head::Lm { w, bias } => {
                check_m(w, self.alphabet.len() + 2, d, "LM head")?;
                if bias.len() != self.alphabet.len() + 2 {
                    return bad("LM bias length".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn to_file(&self) -> SpecFile {
        let sys = &self.system;
        let vec = |v: &[FVal]| v.iter().map(|&x| sys.format(x)).collect::<Vec<_>>();
        let mat = |m: &Matrix| MatrixFile {
            shape: [m.rows, m.cols],
            entries: m
                .data
                .iter()
                .enumerate()
                .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, sys.format(v))))
                .collect(),
        };
        SpecFile {
            float_system: sys.clone(),
            alphabet: self.alphabet.symbols().to_vec(),
            d_model: self.d_model,
            d_ff: self.d_ff,
            num_layers: self.layers.len(),
            attention_mode: self.attention_mode,
            masking: self.masking,
            ln_mode: match &self.ln_mode {
                LnMode::Identity => LnFile::Identity,
                LnMode::Standard { eps, gamma, beta } => {
                    LnFile::Standard { eps: sys.format(*eps), gamma: vec(gamma), beta: vec(beta) }
                }
            },
            embedding: self.embedding.iter().map(|e| vec(e)).collect(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    w_q: mat(&l.wq),
                    w_k: mat(&l.wk),
                    w_v: mat(&l.wv),
                    w_f1: mat(&l.wf1),
                    b_f1: vec(&l.bf1),
                    w_f2: mat(&l.wf2),
                    b_f2: vec(&l.bf2),
                })
                .collect(),
            head: match &self.head {
                Head::Classifier { theta, bias } => HeadFile::Classifier { theta: vec(theta), bias: sys.format(*bias) },
                Head::Lm { w, bias } => HeadFile::Lm { w: mat(w), bias: vec(bias) },
            },
            dimension_map: self.dimension_map.clone(),
        }
    }

    pub fn from_file(f: &SpecFile) -> Result<Self, TransformerError> {
        let sys = f.float_system.clone();
        let val = |s: &str| -> Result<FVal, TransformerError> {
            let x = parse_f64(s).map_err(|e| TransformerError::Parse(e.to_string()))?;
            let v = sys.round_to(x);
            if sys.value(v) != x {
                return Err(TransformerError::Parse(format!("{s} is not an element of the float system")));
            }
            Ok(v)
        };
        let vec = |xs: &[String]| xs.iter().map(|s| val(s)).collect::<Result<Vec<_>, _>>();
        let mat = |m: &MatrixFile| -> Result<Matrix, TransformerError> {
            let [rows, cols] = m.shape;
            let mut out = Matrix::zeros(rows, cols);
            for (r, c, s) in &m.entries {
                if *r >= rows || *c >= cols {
                    return Err(TransformerError::Shape(format!("entry ({r}, {c}) outside {rows}x{cols}")));
                }
                out.set(&sys, *r, *c, val(s)?);
            }
            Ok(out)
        };
        let alphabet = Alphabet::new(f.alphabet.clone()).map_err(|e| TransformerError::Parse(e.to_string()))?;
        let layers = f
            .layers
            .iter()
            .map(|l| {
                Ok(Layer {
                    wq: mat(&l.w_q)?,
                    wk: mat(&l.w_k)?,
                    wv: mat(&l.w_v)?,
                    wf1: mat(&l.w_f1)?,
                    bf1: vec(&l.b_f1)?,
                    wf2: mat(&l.w_f2)?,
                    bf2: vec(&l.b_f2)?,
                })
            })
            .collect::<Result<Vec<_>, TransformerError>>()?;
        if layers.len() != f.num_layers {
            return Err(TransformerError::Shape(format!(
                "num_layers {} but {} layers given",
                f.num_layers,
                layers.len()
            )));
        }
        let spec = TransformerSpec {
            alphabet,
            d_model: f.d_model,
            d_ff: f.d_ff,
            embedding: f.embedding.iter().map(|e| vec(e)).collect::<Result<_, _>>()?,
            layers,
            ln_mode: match &f.ln_mode {
                LnFile::Identity => LnMode::Identity,
                LnFile::Standard { eps, gamma, beta } => {
                    LnMode::Standard { eps: val(eps)?, gamma: vec(gamma)?, beta: vec(beta)? }
                }
            },
            attention_mode: f.attention_mode,
            masking: f.masking,
            head: match &f.head {
                HeadFile::Classifier { theta, bias } => Head::Classifier { theta: vec(theta)?, bias: val(bias)? },
                HeadFile::Lm { w, bias } => Head::Lm { w: mat(w)?, bias: vec(bias)? },
            },
            dimension_map: f.dimension_map.clone(),
            system: sys,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("spec serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, TransformerError> {
        let f: SpecFile = serde_json::from_str(text).map_err(|e| TransformerError::Parse(e.to_string()))?;
        Self::from_file(&f)
    }
}

/// `[row, col, "value"]` triples under an explicit shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub shape: [usize; 2],
    pub entries: Vec<(usize, usize, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerFile {
    pub w_q: MatrixFile,
    pub w_k: MatrixFile,
    pub w_v: MatrixFile,
    pub w_f1: MatrixFile,
    pub b_f1: Vec<String>,
    pub w_f2: MatrixFile,
    pub b_f2: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LnFile {
    Identity,
    Standard { eps: String, gamma: Vec<String>, beta: Vec<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeadFile {
    Classifier { theta: Vec<String>, bias: String },
    Lm { w: MatrixFile, bias: Vec<String> },
}

/// On-disk transformer spec: decimal-string weights with `inf`/`-inf`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecFile {
    pub float_system: FloatSystem,
    pub alphabet: Vec<String>,
    pub d_model: usize,
    pub d_ff: usize,
    pub num_layers: usize,
    pub attention_mode: AttentionMode,
    pub masking: Masking,
    pub ln_mode: LnFile,
    pub embedding: Vec<Vec<String>>,
    pub layers: Vec<LayerFile>,
    pub head: HeadFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dimension_map: Vec<DimInfo>,
}
