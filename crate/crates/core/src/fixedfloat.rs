//! Finite floating-point universes with saturating infinities.
//!
//! Every numeric quantity in the crate is an [`FVal`]: an index into the sorted
//! value table of a [`FloatSystem`]. Primitive operations are computed on an
//! `f64` substrate (exact for all supported grids except `exp`, `/` and `√`,
//! where `f64` is correctly rounded and far finer than any system here) and
//! then rounded back into the system.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest number of finite values a system may hold.
pub const MAX_SYSTEM_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FloatError {
    #[error("invalid float system: {0}")]
    InvalidSystem(String),
    #[error("undefined sum inf + (-inf)")]
    InfMinusInf,
    #[error("undefined product 0 * inf")]
    ZeroTimesInf,
    #[error("division by zero")]
    DivByZero,
    #[error("undefined quotient inf / inf")]
    InfOverInf,
    #[error("operands belong to different float systems")]
    SystemMismatch,
    #[error("softmax denominator rounded to 0 with a nonzero numerator")]
    SoftmaxZeroDenominator,
    #[error("softmax of an empty sequence")]
    EmptySoftmax,
    #[error("cannot parse numeric literal '{0}'")]
    BadLiteral(String),
}

/// How a system breaks rounding ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TieRule {
    /// Even mantissa code; on a minifloat grid this is the even magnitude index.
    EvenMantissa,
    /// Smaller magnitude.
    TowardZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SystemDesc {
    Minifloat { exp: u32, man: u32 },
    Explicit { values: Vec<String> },
}

#[derive(Debug)]
struct Inner {
    desc: SystemDesc,
    id: u64,
    /// Sorted, `-inf` first and `+inf` last.
    values: Vec<f64>,
    zero: u32,
    tie: TieRule,
    tables: OnceLock<Tables>,
}

/// Precomputed `+`, `×`, `÷` over all element pairs and `exp` per element;
/// `ERR` marks an undefined result, recomputed directly for its error.
#[derive(Debug)]
struct Tables {
    n: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    div: Vec<u16>,
    exp: Vec<u16>,
}

const ERR: u16 = u16::MAX;

/// Systems up to this many elements may cache their operation tables.
pub const TABLE_LIMIT: usize = 1100;

/// A finite value set 𝔽 ∪ {±∞}, closed under negation.
#[derive(Clone)]
pub struct FloatSystem(Arc<Inner>);

/// A value of some [`FloatSystem`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FVal {
    sys: u64,
    idx: u32,
}

impl fmt::Debug for FloatSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FloatSystem({:?}, {} values)", self.0.desc, self.0.values.len())
    }
}

impl PartialEq for FloatSystem {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id && self.0.values == other.0.values
    }
}

impl Eq for FloatSystem {}

impl fmt::Debug for FVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FVal#{}", self.idx)
    }
}

impl FVal {
    /// Position in the owning system's sorted value table.
    pub fn index(self) -> u32 {
        self.idx
    }
}

/// Unchecked view of a system's cached tables for hot loops. Operands must
/// belong to the system; results are identical to the checked operations,
/// which also produce every error.
#[derive(Clone, Copy)]
pub struct Fast<'a> {
    sys: &'a FloatSystem,
    tables: Option<&'a Tables>,
}

impl fmt::Debug for Fast<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fast({:?}, tables: {})", self.sys, self.tables.is_some())
    }
}

impl<'a> Fast<'a> {
    #[inline]
    fn get(
        &self,
        t: Option<&[u16]>,
        a: FVal,
        b: FVal,
        slow: fn(&FloatSystem, FVal, FVal) -> Result<FVal, FloatError>,
    ) -> Result<FVal, FloatError> {
        if let (Some(t), Some(tab)) = (t, self.tables) {
            let r = t[a.idx as usize * tab.n + b.idx as usize];
            if r != ERR {
                return Ok(FVal { sys: a.sys, idx: r as u32 });
            }
        }
        slow(self.sys, a, b)
    }

    #[inline]
    pub fn add(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        self.get(self.tables.map(|t| t.add.as_slice()), a, b, FloatSystem::add)
    }

    #[inline]
    pub fn mul(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        self.get(self.tables.map(|t| t.mul.as_slice()), a, b, FloatSystem::mul)
    }

    #[inline]
    pub fn div(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        self.get(self.tables.map(|t| t.div.as_slice()), a, b, FloatSystem::div)
    }

    #[inline]
    pub fn is_zero(&self, a: FVal) -> bool {
        a.idx == self.sys.0.zero
    }

    /// Same contract as [`FloatSystem::dot`].
    #[inline]
    pub fn dot<I: IntoIterator<Item = (FVal, FVal)>>(&self, terms: I) -> Result<FVal, FloatError> {
        let mut acc = self.sys.zero();
        for (w, x) in terms {
            if self.is_zero(w) || self.is_zero(x) {
                continue;
            }
            acc = self.add(acc, self.mul(w, x)?)?;
        }
        Ok(acc)
    }

    /// Same contract as [`FloatSystem::softmax_into`].
    pub fn softmax_into(&self, scores: &[FVal], out: &mut Vec<FVal>) -> Result<(), FloatError> {
        let Some(t) = self.tables else {
            return self.sys.softmax_into(scores, out);
        };
        out.clear();
        if scores.is_empty() {
            return Err(FloatError::EmptySoftmax);
        }
        let mut den = self.sys.zero();
        for &s in scores {
            let e = FVal { sys: s.sys, idx: t.exp[s.idx as usize] as u32 };
            out.push(e);
            den = self.add(den, e)?;
        }
        if self.is_zero(den) {
            if out.iter().all(|&n| self.is_zero(n)) {
                return Ok(());
            }
            return Err(FloatError::SoftmaxZeroDenominator);
        }
        for n in out.iter_mut() {
            *n = self.div(*n, den)?;
        }
        Ok(())
    }
}

/// Formats an extended real the way every serialized numeric is spelled.
pub fn format_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Parses "inf", "-inf" or a decimal literal.
pub fn parse_f64(s: &str) -> Result<f64, FloatError> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(FloatError::BadLiteral(s.to_string())),
        },
    }
}

fn system_id(values: &[f64]) -> u64 {
    let mut h = DefaultHasher::new();
    for v in values {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

impl FloatSystem {
    fn build(desc: SystemDesc, mut finite: Vec<f64>, tie: TieRule) -> Result<Self, FloatError> {
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(FloatError::InvalidSystem("non-finite value in finite set".into()));
        }
        finite.iter_mut().for_each(|v| *v += 0.0);
        finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
        finite.dedup();
        if finite.len() > MAX_SYSTEM_SIZE {
            return Err(FloatError::InvalidSystem(format!(
                "{} finite values exceeds the cap of {MAX_SYSTEM_SIZE}",
                finite.len()
            )));
        }
        for req in [0.0, 1.0, -1.0] {
            if finite.binary_search_by(|v| v.partial_cmp(&req).unwrap()).is_err() {
                return Err(FloatError::InvalidSystem(format!("missing required value {req}")));
            }
        }
        let n = finite.len();
        for i in 0..n {
            if finite[i] != -finite[n - 1 - i] {
                return Err(FloatError::InvalidSystem("set is not closed under negation".into()));
            }
        }
        let mut values = Vec::with_capacity(n + 2);
        values.push(f64::NEG_INFINITY);
        values.extend(finite);
        values.push(f64::INFINITY);
        let zero = values.iter().position(|&v| v == 0.0).unwrap() as u32;
        let id = system_id(&values);
        Ok(FloatSystem(Arc::new(Inner { desc, id, values, zero, tie, tables: OnceLock::new() })))
    }

    /// IEEE-style minifloat grid with `exponent_bits` exponent and
    /// `mantissa_bits` fraction bits, bias `2^(e-1) - 1` and subnormals.
    ///
    /// All exponent codes encode finite numbers; the two infinities are
    /// separate elements, so `(4, 3)` has 255 distinct finite values
    /// (both zero codes collapse), `min_pos = 2^-9` and `max_fin = 480`.
    pub fn minifloat(exponent_bits: u32, mantissa_bits: u32) -> Result<Self, FloatError> {
        if exponent_bits < 2 || mantissa_bits < 1 {
            return Err(FloatError::InvalidSystem(format!(
                "minifloat needs exponent_bits >= 2 and mantissa_bits >= 1, got ({exponent_bits}, {mantissa_bits})"
            )));
        }
        if exponent_bits + mantissa_bits + 1 > 16 {
            return Err(FloatError::InvalidSystem(format!(
                "minifloat ({exponent_bits}, {mantissa_bits}) exceeds 2^16 codes"
            )));
        }
        let bias = (1i32 << (exponent_bits - 1)) - 1;
        let scale = (1u32 << mantissa_bits) as f64;
        let mut mags = Vec::new();
        for code in 0..(1u32 << exponent_bits) {
            for frac in 0..(1u32 << mantissa_bits) {
                let m = frac as f64 / scale;
                let v = if code == 0 { m * 2f64.powi(1 - bias) } else { (1.0 + m) * 2f64.powi(code as i32 - bias) };
                mags.push(v);
            }
        }
        let mut finite: Vec<f64> = mags.iter().map(|v| -v).collect();
        finite.extend(mags);
        Self::build(SystemDesc::Minifloat { exp: exponent_bits, man: mantissa_bits }, finite, TieRule::EvenMantissa)
    }

    /// System from an explicit finite value set; ties round toward zero.
    ///
    /// The set is closed under negation by adding any missing negatives, so
    /// `{-1, -0.25, 0, 0.25, 0.5, 1}` also gains `-0.5`. Infinite entries are
    /// ignored (both infinities are always present).
    pub fn explicit(values: &[f64]) -> Result<Self, FloatError> {
        let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let negs: Vec<f64> = finite.iter().map(|v| -v).collect();
        finite.extend(negs);
        let mut sorted = finite.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        let desc = SystemDesc::Explicit { values: sorted.iter().map(|&v| format_f64(v)).collect() };
        Self::build(desc, finite, TieRule::TowardZero)
    }

    /// Fixed-point grid `{k·step : |k·step| <= max}`; `step` must divide 1.
    pub fn fixed_grid(step: f64, max: f64) -> Result<Self, FloatError> {
        if !(step > 0.0) || !(max >= 1.0) {
            return Err(FloatError::InvalidSystem("fixed grid needs step > 0 and max >= 1".into()));
        }
        let k = (max / step).floor() as i64;
        if (2 * k + 1) as usize > MAX_SYSTEM_SIZE {
            return Err(FloatError::InvalidSystem("fixed grid too large".into()));
        }
        let vals: Vec<f64> = (-k..=k).map(|i| i as f64 * step).collect();
        Self::explicit(&vals)
    }

    pub fn from_desc(desc: &SystemDesc) -> Result<Self, FloatError> {
        match desc {
            SystemDesc::Minifloat { exp, man } => Self::minifloat(*exp, *man),
            SystemDesc::Explicit { values } => {
                let vals = values.iter().map(|s| parse_f64(s)).collect::<Result<Vec<_>, _>>()?;
                Self::explicit(&vals)
            }
        }
    }

    /// The default system, minifloat(4, 3).
    pub fn default_system() -> Self {
        Self::minifloat(4, 3).expect("minifloat(4,3) is valid")
    }

    pub fn desc(&self) -> &SystemDesc {
        &self.0.desc
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Number of elements including both infinities.
    pub fn len(&self) -> usize {
        self.0.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All elements in ascending order, `-inf` first.
    pub fn elements(&self) -> impl Iterator<Item = FVal> + '_ {
        (0..self.0.values.len() as u32).map(move |idx| FVal { sys: self.0.id, idx })
    }

    pub fn finite_values(&self) -> &[f64] {
        let v = &self.0.values;
        &v[1..v.len() - 1]
    }

    pub fn zero(&self) -> FVal {
        FVal { sys: self.0.id, idx: self.0.zero }
    }

    pub fn one(&self) -> FVal {
        self.round_to(1.0)
    }

    pub fn pos_inf(&self) -> FVal {
        FVal { sys: self.0.id, idx: self.0.values.len() as u32 - 1 }
    }

    pub fn neg_inf(&self) -> FVal {
        FVal { sys: self.0.id, idx: 0 }
    }

    pub fn min_pos(&self) -> f64 {
        self.0.values[self.0.zero as usize + 1]
    }

    pub fn max_fin(&self) -> f64 {
        self.0.values[self.0.values.len() - 2]
    }

    pub fn contains(&self, v: FVal) -> bool {
        v.sys == self.0.id && (v.idx as usize) < self.0.values.len()
    }

    #[inline]
    fn check(&self, v: FVal) -> Result<(), FloatError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(FloatError::SystemMismatch)
        }
    }

    /// Real value of an element (±∞ as `f64` infinities).
    #[inline]
    pub fn value(&self, v: FVal) -> f64 {
        debug_assert!(self.contains(v), "FVal from a foreign system");
        self.0.values[v.idx as usize]
    }

    #[inline]
    pub fn is_zero(&self, v: FVal) -> bool {
        v.idx == self.0.zero
    }

    /// Whether `x` is exactly representable.
    pub fn represents(&self, x: f64) -> bool {
        self.value(self.round_to(x)) == x
    }

    /// Nearest element; saturates to ±∞ beyond `max_fin`.
    pub fn round_to(&self, x: f64) -> FVal {
        debug_assert!(!x.is_nan(), "round_to(NaN)");
        let vals = &self.0.values;
        let top = vals.len() - 1;
        let mk = |idx: usize| FVal { sys: self.0.id, idx: idx as u32 };
        if x > self.max_fin() {
            return mk(top);
        }
        if x < -self.max_fin() {
            return mk(0);
        }
        // first index with vals[i] >= x, within the finite range
        let hi = vals[1..top].partition_point(|&v| v < x) + 1;
        if vals[hi] == x {
            return mk(hi);
        }
        let lo = hi - 1;
        let (dl, dh) = (x - vals[lo], vals[hi] - x);
        if dl < dh {
            mk(lo)
        } else if dh < dl {
            mk(hi)
        } else {
            let zero = self.0.zero as usize;
            let pick = match self.0.tie {
                TieRule::TowardZero => {
                    if vals[lo].abs() < vals[hi].abs() {
                        lo
                    } else {
                        hi
                    }
                }
                TieRule::EvenMantissa => {
                    if lo.abs_diff(zero) % 2 == 0 {
                        lo
                    } else {
                        hi
                    }
                }
            };
            mk(pick)
        }
    }

    /// Distance between two elements in rounding steps (index difference).
    pub fn steps_between(&self, a: FVal, b: FVal) -> u32 {
        a.idx.abs_diff(b.idx)
    }

    pub fn neg(&self, a: FVal) -> FVal {
        FVal { sys: a.sys, idx: self.0.values.len() as u32 - 1 - a.idx }
    }

    /// Table-backed unchecked operations; builds the tables when the system
    /// is small enough.
    pub(crate) fn fast(&self) -> Fast<'_> {
        self.precompute_tables();
        Fast { sys: self, tables: self.0.tables.get() }
    }

    /// The same view without tables: every operation is checked.
    pub(crate) fn checked(&self) -> Fast<'_> {
        Fast { sys: self, tables: None }
    }

    /// Builds the cached operation tables (idempotent). Results are identical
    /// to direct evaluation; only speed changes. Returns `false` for systems
    /// larger than [`TABLE_LIMIT`].
    pub fn precompute_tables(&self) -> bool {
        let n = self.len();
        if n > TABLE_LIMIT {
            return false;
        }
        self.0.tables.get_or_init(|| {
            let elems: Vec<FVal> = self.elements().collect();
            let code = |r: Result<FVal, FloatError>| r.map_or(ERR, |v| v.idx as u16);
            let mut add = Vec::with_capacity(n * n);
            let mut mul = Vec::with_capacity(n * n);
            let mut div = Vec::with_capacity(n * n);
            for &a in &elems {
                for &b in &elems {
                    add.push(code(self.add_direct(a, b)));
                    mul.push(code(self.mul_direct(a, b)));
                    div.push(code(self.div_direct(a, b)));
                }
            }
            let exp = elems.iter().map(|&a| code(Ok(self.exp_direct(a)))).collect();
            Tables { n, add, mul, div, exp }
        });
        true
    }

    #[inline]
    fn lookup(
        &self,
        table: fn(&Tables) -> &[u16],
        a: FVal,
        b: FVal,
        direct: fn(&Self, FVal, FVal) -> Result<FVal, FloatError>,
    ) -> Result<FVal, FloatError> {
        match self.0.tables.get() {
            Some(t) => match table(t)[a.idx as usize * t.n + b.idx as usize] {
                ERR => direct(self, a, b),
                r => Ok(FVal { sys: self.0.id, idx: r as u32 }),
            },
            None => direct(self, a, b),
        }
    }

    #[inline]
    pub fn add(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        self.check(a)?;
        self.check(b)?;
        self.lookup(|t| &t.add, a, b, Self::add_direct)
    }

    fn add_direct(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        // exact shortcuts: x + 0 = x for every element, including ±∞
        if b.idx == self.0.zero {
            return Ok(a);
        }
        if a.idx == self.0.zero {
            return Ok(b);
        }
        let (x, y) = (self.value(a), self.value(b));
        if x.is_infinite() && y.is_infinite() && x != y {
            return Err(FloatError::InfMinusInf);
        }
        if x.is_infinite() {
            return Ok(a);
        }
        if y.is_infinite() {
            return Ok(b);
        }
        Ok(self.round_to(x + y))
    }

    pub fn sub(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        self.check(b)?;
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        self.check(a)?;
        self.check(b)?;
        self.lookup(|t| &t.mul, a, b, Self::mul_direct)
    }

    fn mul_direct(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        let (x, y) = (self.value(a), self.value(b));
        if (x.is_infinite() && y == 0.0) || (y.is_infinite() && x == 0.0) {
            return Err(FloatError::ZeroTimesInf);
        }
        if x.is_infinite() || y.is_infinite() {
            let neg = (x < 0.0) != (y < 0.0);
            return Ok(if neg { self.neg_inf() } else { self.pos_inf() });
        }
        Ok(self.round_to(x * y))
    }

    #[inline]
    pub fn div(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        self.check(a)?;
        self.check(b)?;
        self.lookup(|t| &t.div, a, b, Self::div_direct)
    }

    fn div_direct(&self, a: FVal, b: FVal) -> Result<FVal, FloatError> {
        let (x, y) = (self.value(a), self.value(b));
        if y == 0.0 {
            return Err(FloatError::DivByZero);
        }
        match (x.is_infinite(), y.is_infinite()) {
            (true, true) => Err(FloatError::InfOverInf),
            (false, true) => Ok(self.zero()),
            (true, false) => {
                let neg = (x < 0.0) != (y < 0.0);
                Ok(if neg { self.neg_inf() } else { self.pos_inf() })
            }
            (false, false) => Ok(self.round_to(x / y)),
        }
    }

    #[inline]
    pub fn exp(&self, a: FVal) -> Result<FVal, FloatError> {
        self.check(a)?;
        Ok(match self.0.tables.get() {
            Some(t) => FVal { sys: self.0.id, idx: t.exp[a.idx as usize] as u32 },
            None => self.exp_direct(a),
        })
    }

    fn exp_direct(&self, a: FVal) -> FVal {
        let x = self.value(a);
        if x == f64::INFINITY {
            self.pos_inf()
        } else if x == f64::NEG_INFINITY {
            self.zero()
        } else {
            self.round_to(x.exp())
        }
    }

    /// √x for non-negative x (√∞ = ∞).
    pub fn sqrt(&self, a: FVal) -> Result<FVal, FloatError> {
        self.check(a)?;
        let x = self.value(a);
        if x < 0.0 {
            return Err(FloatError::InvalidSystem("square root of a negative value".into()));
        }
        Ok(self.round_to(x.sqrt()))
    }

    #[inline]
    pub fn relu(&self, a: FVal) -> FVal {
        if self.value(a) > 0.0 {
            a
        } else {
            self.zero()
        }
    }

    pub fn max(&self, a: FVal, b: FVal) -> FVal {
        if a.idx >= b.idx {
            a
        } else {
            b
        }
    }

    /// Strict left-to-right sum, rounding after every addition.
    #[inline]
    pub fn sum<I: IntoIterator<Item = FVal>>(&self, terms: I) -> Result<FVal, FloatError> {
        terms.into_iter().try_fold(self.zero(), |acc, t| self.add(acc, t))
    }

    /// Left-to-right dot product used by every linear map.
    ///
    /// Terms with an exactly-zero factor are skipped. For finite operands this
    /// is identical to accumulating `a·0 = 0`; with infinite weights it gives
    /// the linear-map reading `∞·0 = 0` that the attention construction needs.
    #[inline]
    pub fn dot<I: IntoIterator<Item = (FVal, FVal)>>(&self, terms: I) -> Result<FVal, FloatError> {
        let mut acc = self.zero();
        for (w, x) in terms {
            if self.is_zero(w) || self.is_zero(x) {
                continue;
            }
            let p = self.mul(w, x)?;
            acc = self.add(acc, p)?;
        }
        Ok(acc)
    }

    /// Softmax with a left-to-right denominator.
    ///
    /// A zero denominator is accepted only when every numerator is zero
    /// (all scores `-inf`); the result is then the zero vector.
    pub fn softmax(&self, scores: &[FVal]) -> Result<Vec<FVal>, FloatError> {
        let mut out = Vec::with_capacity(scores.len());
        self.softmax_into(scores, &mut out)?;
        Ok(out)
    }

    /// [`FloatSystem::softmax`] into a reused buffer (cleared first).
    pub fn softmax_into(&self, scores: &[FVal], out: &mut Vec<FVal>) -> Result<(), FloatError> {
        out.clear();
        if scores.is_empty() {
            return Err(FloatError::EmptySoftmax);
        }
        for &s in scores {
            out.push(self.exp(s)?);
        }
        let den = self.sum(out.iter().copied())?;
        if self.is_zero(den) {
            if out.iter().all(|&n| self.is_zero(n)) {
                return Ok(());
            }
            return Err(FloatError::SoftmaxZeroDenominator);
        }
        for n in out.iter_mut() {
            *n = self.div(*n, den)?;
        }
        Ok(())
    }

    /// `⌊min(1, max_fin) / min_pos⌋`.
    pub fn max_attention_span(&self) -> u64 {
        attention_span_bound(self.min_pos(), self.max_fin())
    }

    pub fn format(&self, v: FVal) -> String {
        format_f64(self.value(v))
    }

    pub fn parse(&self, s: &str) -> Result<FVal, FloatError> {
        Ok(self.round_to(parse_f64(s)?))
    }
}

/// `⌊min(1, max_fin) / min_pos⌋` for arbitrary extremal values.
pub fn attention_span_bound(min_pos: f64, max_fin: f64) -> u64 {
    (max_fin.min(1.0) / min_pos).floor() as u64
}

impl Serialize for FloatSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.desc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FloatSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let desc = SystemDesc::deserialize(d)?;
        FloatSystem::from_desc(&desc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s6() -> FloatSystem {
        FloatSystem::explicit(&[-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0]).unwrap()
    }

    #[test]
    fn minifloat_4_3_grid() {
        let s = FloatSystem::minifloat(4, 3).unwrap();
        assert_eq!(s.finite_values().len(), 255);
        assert_eq!(s.min_pos(), 2f64.powi(-9));
        assert_eq!(s.max_fin(), 480.0);
        assert_eq!(s.max_attention_span(), 512);
    }

    #[test]
    fn minifloat_rejects_small_params() {
        assert!(FloatSystem::minifloat(1, 1).is_err());
        assert!(FloatSystem::minifloat(2, 0).is_err());
        assert!(FloatSystem::minifloat(8, 8).is_err());
    }

    #[test]
    fn explicit_closes_under_negation() {
        let s = FloatSystem::explicit(&[-1.0, -0.25, 0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(s.finite_values(), &[-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0]);
        assert_eq!(s.min_pos(), 0.25);
        assert_eq!(s.max_fin(), 1.0);
        assert!(FloatSystem::explicit(&[0.0, 0.5]).is_err());
    }

    #[test]
    fn span_bound_formula() {
        assert_eq!(attention_span_bound(0.25, 1.0), 4);
        assert_eq!(attention_span_bound(2f64.powi(-9), 480.0), 512);
        assert_eq!(attention_span_bound(0.25, 0.5), 2);
    }

    #[test]
    fn ties_to_even_mantissa() {
        let s = FloatSystem::minifloat(4, 3).unwrap();
        // 16 + 1 lies halfway between 16 (even code) and 18 (odd code)
        assert_eq!(s.value(s.round_to(17.0)), 16.0);
        assert_eq!(s.value(s.round_to(19.0)), 20.0);
        assert_eq!(s.value(s.round_to(-17.0)), -16.0);
    }

    #[test]
    fn ties_toward_zero_for_explicit() {
        let s = s6();
        assert_eq!(s.value(s.round_to(0.375)), 0.25);
        assert_eq!(s.value(s.round_to(-0.75)), -0.5);
    }

    #[test]
    fn special_values() {
        let s = s6();
        let (inf, ninf, one, zero) = (s.pos_inf(), s.neg_inf(), s.one(), s.zero());
        assert_eq!(s.add(inf, one), Ok(inf));
        assert_eq!(s.add(ninf, one), Ok(ninf));
        assert_eq!(s.add(inf, ninf), Err(FloatError::InfMinusInf));
        assert_eq!(s.mul(inf, s.neg(one)), Ok(ninf));
        assert_eq!(s.mul(zero, inf), Err(FloatError::ZeroTimesInf));
        assert_eq!(s.div(one, inf), Ok(zero));
        assert_eq!(s.div(one, zero), Err(FloatError::DivByZero));
        assert_eq!(s.exp(ninf), Ok(zero));
        assert_eq!(s.exp(inf), Ok(inf));
    }

    #[test]
    fn mixing_systems_is_an_error() {
        let a = s6();
        let b = FloatSystem::minifloat(4, 3).unwrap();
        assert_eq!(a.add(a.one(), b.one()), Err(FloatError::SystemMismatch));
    }

    #[test]
    fn cached_tables_match_direct_evaluation() {
        for sys in [s6(), FloatSystem::minifloat(3, 2).unwrap(), FloatSystem::fixed_grid(0.5, 8.0).unwrap()] {
            let plain = FloatSystem::from_desc(sys.desc()).unwrap();
            assert!(sys.precompute_tables());
            let elems: Vec<FVal> = sys.elements().collect();
            for &a in &elems {
                for &b in &elems {
                    let (pa, pb) = (plain.round_to(sys.value(a)), plain.round_to(sys.value(b)));
                    let lift = |r: Result<FVal, FloatError>| r.map(|v| sys.value(v));
                    let lift_p = |r: Result<FVal, FloatError>| r.map(|v| plain.value(v));
                    assert_eq!(lift(sys.add(a, b)), lift_p(plain.add(pa, pb)));
                    assert_eq!(lift(sys.mul(a, b)), lift_p(plain.mul(pa, pb)));
                    assert_eq!(lift(sys.div(a, b)), lift_p(plain.div(pa, pb)));
                }
                let pa = plain.round_to(sys.value(a));
                assert_eq!(sys.value(sys.exp(a).unwrap()), plain.value(plain.exp(pa).unwrap()));
            }
        }
    }

    #[test]
    fn dot_treats_inf_times_zero_as_absent() {
        let s = FloatSystem::minifloat(4, 3).unwrap();
        let r = s.dot([(s.pos_inf(), s.zero()), (s.one(), s.one())]).unwrap();
        assert_eq!(s.value(r), 1.0);
    }

    #[test]
    fn softmax_all_neg_inf_is_zero() {
        let s = s6();
        let w = s.softmax(&[s.neg_inf(), s.neg_inf()]).unwrap();
        assert!(w.iter().all(|&v| s.is_zero(v)));
    }

    #[test]
    fn descriptor_round_trip() {
        let s = s6();
        let j = serde_json::to_string(&s).unwrap();
        let back: FloatSystem = serde_json::from_str(&j).unwrap();
        assert_eq!(s, back);
        let m: FloatSystem = serde_json::from_str(r#"{"kind":"minifloat","exp":4,"man":3}"#).unwrap();
        assert_eq!(m.max_fin(), 480.0);
    }
}
