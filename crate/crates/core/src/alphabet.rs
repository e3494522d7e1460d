//! Finite alphabets and words over them.
//!
//! Symbols are identifiers; words are stored as symbol indices. When every
//! symbol is a single character, words are written by concatenation (`"abb"`),
//! otherwise as whitespace-separated tokens (`"b1 a b0"`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Symbol index into an [`Alphabet`].
pub type Sym = usize;

/// Words that cannot be used as symbol names.
pub const RESERVED: &[&str] = &["P", "F", "S", "U", "E", "true", "false", "EOS", "UNK"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("alphabet is empty")]
    Empty,
    #[error("duplicate symbol '{0}'")]
    Duplicate(String),
    #[error("invalid symbol name '{0}'")]
    BadName(String),
    #[error("symbol '{0}' is not in the alphabet")]
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = AlphabetError;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(AlphabetError::Empty);
        }
        for (i, s) in symbols.iter().enumerate() {
            if !is_identifier(s) || RESERVED.contains(&s.as_str()) {
                return Err(AlphabetError::BadName(s.clone()));
            }
            if symbols[..i].contains(s) {
                return Err(AlphabetError::Duplicate(s.clone()));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// Alphabet of single-character symbols, e.g. `Alphabet::chars("ab")`.
    pub fn chars(s: &str) -> Result<Self, AlphabetError> {
        Self::new(s.chars().map(|c| c.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.symbols[s]
    }

    pub fn index(&self, name: &str) -> Option<Sym> {
        self.symbols.iter().position(|s| s == name)
    }

    pub fn require(&self, name: &str) -> Result<Sym, AlphabetError> {
        self.index(name).ok_or_else(|| AlphabetError::Unknown(name.to_string()))
    }

    /// True when words are written by concatenating one-character symbols.
    pub fn is_char_mode(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    pub fn parse_word(&self, text: &str) -> Result<Vec<Sym>, AlphabetError> {
        if self.is_char_mode() {
            text.chars().filter(|c| !c.is_whitespace()).map(|c| self.require(&c.to_string())).collect()
        } else {
            text.split_whitespace().map(|t| self.require(t)).collect()
        }
    }

    pub fn format_word(&self, w: &[Sym]) -> String {
        let sep = if self.is_char_mode() { "" } else { " " };
        w.iter().map(|&s| self.symbols[s].as_str()).collect::<Vec<_>>().join(sep)
    }

    /// All words of length `0..=max_len` in shortlex order.
    pub fn shortlex(&self, max_len: usize) -> Shortlex {
        Shortlex { k: self.len(), max_len, cur: Some(Vec::new()) }
    }

    /// Number of words of length `0..=max_len`, saturating.
    pub fn count_up_to(&self, max_len: usize) -> u64 {
        let k = self.len() as u64;
        let mut total: u64 = 0;
        let mut layer: u64 = 1;
        for _ in 0..=max_len {
            total = total.saturating_add(layer);
            layer = layer.saturating_mul(k);
        }
        total
    }
}

/// Shortlex enumerator of words over `0..k`.
#[derive(Debug, Clone)]
pub struct Shortlex {
    k: usize,
    max_len: usize,
    cur: Option<Vec<Sym>>,
}

impl Shortlex {
    /// All words over `0..k` of length `0..=max_len`.
    pub fn over(k: usize, max_len: usize) -> Self {
        Shortlex { k, max_len, cur: Some(Vec::new()) }
    }
}

impl Iterator for Shortlex {
    type Item = Vec<Sym>;

    fn next(&mut self) -> Option<Vec<Sym>> {
        let out = self.cur.take()?;
        let mut nxt = out.clone();
        let mut i = nxt.len();
        loop {
            if i == 0 {
                if nxt.len() == self.max_len {
                    self.cur = None;
                    return Some(out);
                }
                nxt = vec![0; nxt.len() + 1];
                break;
            }
            i -= 1;
            if nxt[i] + 1 < self.k {
                nxt[i] += 1;
                break;
            }
            nxt[i] = 0;
        }
        self.cur = Some(nxt);
        Some(out)
    }
}
