//! Benchmark languages: membership oracles, reference DFAs and seeded
//! positive/negative sample generators.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError, Sym};
use crate::automata::Dfa;
use crate::logic::{parse_ltl, Ltl};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("unknown language '{0}'")]
    Unknown(String),
    #[error("{0} is not regular")]
    NotRegular(LanguageId),
    #[error("no {polarity} sample of length {length} exists for {lang}")]
    Infeasible { lang: LanguageId, length: usize, polarity: &'static str },
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LanguageId {
    Cnt,
    Parity,
    #[serde(rename = "DYCK_1_2")]
    Dyck12,
    #[serde(rename = "DYCK_1_1")]
    Dyck11,
    Lt2,
    Rdp1,
    Last,
    Pt2,
    Lt1,
    Ldp1,
    Ldp2,
    First,
    BbStar,
}

impl LanguageId {
    pub const ALL: [LanguageId; 13] = [
        LanguageId::Cnt,
        LanguageId::Parity,
        LanguageId::Dyck12,
        LanguageId::Dyck11,
        LanguageId::Lt2,
        LanguageId::Rdp1,
        LanguageId::Last,
        LanguageId::Pt2,
        LanguageId::Lt1,
        LanguageId::Ldp1,
        LanguageId::Ldp2,
        LanguageId::First,
        LanguageId::BbStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LanguageId::Cnt => "CNT",
            LanguageId::Parity => "PARITY",
            LanguageId::Dyck12 => "DYCK_1_2",
            LanguageId::Dyck11 => "DYCK_1_1",
            LanguageId::Lt2 => "LT2",
            LanguageId::Rdp1 => "RDP1",
            LanguageId::Last => "LAST",
            LanguageId::Pt2 => "PT2",
            LanguageId::Lt1 => "LT1",
            LanguageId::Ldp1 => "LDP1",
            LanguageId::Ldp2 => "LDP2",
            LanguageId::First => "FIRST",
            LanguageId::BbStar => "BB_STAR",
        }
    }

    pub fn symbols(self) -> &'static [&'static str] {
        match self {
            LanguageId::Lt2 | LanguageId::Pt2 => &["a", "b", "c"],
            LanguageId::Rdp1 | LanguageId::Ldp1 => &["a", "b0", "b1"],
            LanguageId::Ldp2 => &["a1", "a2", "b0", "b1", "b2"],
            _ => &["a", "b"],
        }
    }

    pub fn alphabet(self) -> Alphabet {
        Alphabet::new(self.symbols().iter().copied()).expect("built-in alphabets are valid")
    }

    pub fn is_regular(self) -> bool {
        self != LanguageId::Cnt
    }

    /// Expected class row: the smallest of regular, star-free, unambiguous
    /// polynomial and left-deterministic polynomial containing the language.
    pub fn expected_class(self) -> Option<&'static str> {
        Some(match self {
            LanguageId::Cnt => return None,
            LanguageId::Parity => "regular",
            LanguageId::Dyck12 | LanguageId::Dyck11 | LanguageId::Lt2 => "star-free",
            LanguageId::Rdp1 | LanguageId::Last => "unambiguous polynomial",
            _ => "left-deterministic polynomial",
        })
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LanguageId {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, LangError> {
        let norm: String =
            s.chars().filter(|c| !matches!(c, '(' | ')' | ',' | '-' | '_')).flat_map(char::to_uppercase).collect();
        let id = match norm.as_str() {
            "CNT" => LanguageId::Cnt,
            "PARITY" => LanguageId::Parity,
            "DYCK12" => LanguageId::Dyck12,
            "DYCK11" => LanguageId::Dyck11,
            "LT2" => LanguageId::Lt2,
            "RDP1" => LanguageId::Rdp1,
            "LAST" => LanguageId::Last,
            "PT2" => LanguageId::Pt2,
            "LT1" => LanguageId::Lt1,
            "LDP1" => LanguageId::Ldp1,
            "LDP2" => LanguageId::Ldp2,
            "FIRST" => LanguageId::First,
            "BBSTAR" => LanguageId::BbStar,
            _ => return Err(LangError::Unknown(s.to_string())),
        };
        Ok(id)
    }
}

/// Decides membership directly, without automata.
pub fn membership(id: LanguageId, w: &[Sym]) -> Result<bool, LangError> {
    let k = id.symbols().len();
    if let Some(&s) = w.iter().find(|&&s| s >= k) {
        return Err(LangError::Alphabet(AlphabetError::Unknown(format!("#{s}"))));
    }
    Ok(member(id, w))
}

/// Parses `text` over the language's alphabet and decides membership.
pub fn membership_str(id: LanguageId, text: &str) -> Result<bool, LangError> {
    let w = id.alphabet().parse_word(text)?;
    membership(id, &w)
}

fn member(id: LanguageId, w: &[Sym]) -> bool {
    const A: Sym = 0;
    const B: Sym = 1;
    match id {
        LanguageId::Cnt => {
            let n = w.iter().take_while(|&&s| s == A).count();
            w.len() == 2 * n && w[n..].iter().all(|&s| s == B)
        }
        LanguageId::Parity => w.iter().filter(|&&s| s == B).count() % 2 == 0,
        LanguageId::Dyck11 | LanguageId::Dyck12 => {
            let bound = if id == LanguageId::Dyck11 { 1 } else { 2 };
            let mut depth = 0i64;
            for &s in w {
                depth += if s == A { 1 } else { -1 };
                if depth < 0 || depth > bound {
                    return false;
                }
            }
            depth == 0
        }
        LanguageId::Lt2 => w.windows(2).any(|p| p == [A, B]),
        LanguageId::Lt1 => w.contains(&A),
        LanguageId::Pt2 => match w.iter().position(|&s| s == A) {
            Some(i) => w[i + 1..].contains(&B),
            None => false,
        },
        LanguageId::Last => w.last() == Some(&B),
        LanguageId::First => w.first() == Some(&B),
        LanguageId::BbStar => w.starts_with(&[B, B]),
        // (Σ∖{b0})* a (Σ∖{a,b1})*  over {a, b0, b1}: the split point is the last a
        LanguageId::Rdp1 => match w.iter().rposition(|&s| s == 0) {
            Some(i) => w[..i].iter().all(|&s| s != 1) && w[i + 1..].iter().all(|&s| s == 1),
            None => false,
        },
        // (Σ∖{a,b0})* a (Σ∖{b1})*: the split point is the first a
        LanguageId::Ldp1 => match w.iter().position(|&s| s == 0) {
            Some(i) => w[..i].iter().all(|&s| s == 2) && w[i + 1..].iter().all(|&s| s != 2),
            None => false,
        },
        // (Σ∖{a1,b0})* a1 (Σ∖{a2,b1})* a2 (Σ∖{b2})*  over {a1, a2, b0, b1, b2}
        LanguageId::Ldp2 => {
            let Some(i) = w.iter().position(|&s| s == 0) else { return false };
            if w[..i].contains(&2) {
                return false;
            }
            let Some(j) = w[i + 1..].iter().position(|&s| s == 1).map(|j| j + i + 1) else { return false };
            !w[i + 1..j].contains(&3) && !w[j + 1..].contains(&4)
        }
    }
}

/// Hand-written PTL formula (read at `N + 1`) for the left-deterministic
/// polynomial languages; `None` for the others.
pub fn reference_ptl(id: LanguageId) -> Option<Arc<Ltl>> {
    let text = match id {
        LanguageId::First => "P (b & !P true)",
        LanguageId::BbStar => "P (b & !P true) & P (b & P true & !P P true)",
        LanguageId::Lt1 => "P a",
        LanguageId::Pt2 => "P (b & P a)",
        LanguageId::Ldp1 => "P (a & !P !b1) & !P (b1 & P a)",
        LanguageId::Ldp2 => {
            let f1 = "(a1 & !P (a1 | b0))";
            let f2 = format!("(a2 & P {f1} & !P (a2 & P {f1}) & !P (b1 & P {f1}))");
            return Some(parse_ltl(&format!("P {f2} & !P (b2 & P {f2})"), &id.alphabet()).expect("well-formed"));
        }
        _ => return None,
    };
    Some(parse_ltl(text, &id.alphabet()).expect("well-formed"))
}

/// Hand-written DFA for a regular language.
pub fn reference_dfa(id: LanguageId) -> Result<Dfa, LangError> {
    let al = id.alphabet();
    let ok = |d: Result<Dfa, crate::automata::AutomataError>| d.expect("built-in automata are valid");
    let d = match id {
        LanguageId::Cnt => return Err(LangError::NotRegular(id)),
        LanguageId::Parity => Dfa::new(
            al,
            &["q0", "q1"],
            "q0",
            &["q0"],
            &[("q0", "a", "q0"), ("q0", "b", "q1"), ("q1", "a", "q1"), ("q1", "b", "q0")],
        ),
        LanguageId::Dyck11 => Dfa::new(al, &["q0", "q1"], "q0", &["q0"], &[("q0", "a", "q1"), ("q1", "b", "q0")]),
        LanguageId::Dyck12 => Dfa::new(
            al,
            &["q0", "q1", "q2"],
            "q0",
            &["q0"],
            &[("q0", "a", "q1"), ("q1", "a", "q2"), ("q2", "b", "q1"), ("q1", "b", "q0")],
        ),
        LanguageId::Lt2 => Dfa::new(
            al,
            &["q0", "q1", "q2"],
            "q0",
            &["q2"],
            &[
                ("q0", "a", "q1"),
                ("q0", "b", "q0"),
                ("q0", "c", "q0"),
                ("q1", "a", "q1"),
                ("q1", "b", "q2"),
                ("q1", "c", "q0"),
                ("q2", "a", "q2"),
                ("q2", "b", "q2"),
                ("q2", "c", "q2"),
            ],
        ),
        LanguageId::Pt2 => Dfa::new(
            al,
            &["q0", "q1", "q2"],
            "q0",
            &["q2"],
            &[
                ("q0", "a", "q1"),
                ("q0", "b", "q0"),
                ("q0", "c", "q0"),
                ("q1", "a", "q1"),
                ("q1", "b", "q2"),
                ("q1", "c", "q1"),
                ("q2", "a", "q2"),
                ("q2", "b", "q2"),
                ("q2", "c", "q2"),
            ],
        ),
        LanguageId::Lt1 => Dfa::new(
            al,
            &["q0", "q1"],
            "q0",
            &["q1"],
            &[("q0", "a", "q1"), ("q0", "b", "q0"), ("q1", "a", "q1"), ("q1", "b", "q1")],
        ),
        LanguageId::Last => Dfa::new(
            al,
            &["q0", "q1"],
            "q0",
            &["q1"],
            &[("q0", "a", "q0"), ("q0", "b", "q1"), ("q1", "a", "q0"), ("q1", "b", "q1")],
        ),
        LanguageId::First => {
            Dfa::new(al, &["q0", "q1"], "q0", &["q1"], &[("q0", "b", "q1"), ("q1", "a", "q1"), ("q1", "b", "q1")])
        }
        LanguageId::BbStar => Dfa::new(
            al,
            &["q0", "q1", "q2"],
            "q0",
            &["q2"],
            &[("q0", "b", "q1"), ("q1", "b", "q2"), ("q2", "a", "q2"), ("q2", "b", "q2")],
        ),
        // q1 is accepting as well: `a` alone matches the expression
        LanguageId::Rdp1 => Dfa::new(
            al,
            &["q0", "q1", "q2"],
            "q0",
            &["q1", "q2"],
            &[
                ("q0", "b1", "q0"),
                ("q0", "a", "q1"),
                ("q1", "a", "q1"),
                ("q1", "b1", "q0"),
                ("q1", "b0", "q2"),
                ("q2", "b0", "q2"),
            ],
        ),
        LanguageId::Ldp1 => Dfa::new(
            al,
            &["q0", "q1"],
            "q0",
            &["q1"],
            &[("q0", "b1", "q0"), ("q0", "a", "q1"), ("q1", "a", "q1"), ("q1", "b0", "q1")],
        ),
        LanguageId::Ldp2 => Dfa::new(
            al,
            &["q0", "q1", "q2"],
            "q0",
            &["q2"],
            &[
                ("q0", "a2", "q0"),
                ("q0", "b1", "q0"),
                ("q0", "b2", "q0"),
                ("q0", "a1", "q1"),
                ("q1", "a1", "q1"),
                ("q1", "b0", "q1"),
                ("q1", "b2", "q1"),
                ("q1", "a2", "q2"),
                ("q2", "a1", "q2"),
                ("q2", "a2", "q2"),
                ("q2", "b0", "q2"),
                ("q2", "b1", "q2"),
            ],
        ),
    };
    Ok(ok(d))
}

/// Uniform sampler over the strings of one length accepted by a DFA.
struct PathSampler<'a> {
    dfa: &'a Dfa,
    /// `counts[r][q]` = number of accepted continuations of length `r` from `q`
    counts: Vec<Vec<f64>>,
}

impl<'a> PathSampler<'a> {
    fn new(dfa: &'a Dfa, len: usize) -> Self {
        let n = dfa.num_states();
        let mut counts = vec![(0..n).map(|q| if dfa.is_final(q) { 1.0 } else { 0.0 }).collect::<Vec<_>>()];
        for r in 1..=len {
            let row = (0..n)
                .map(|q| (0..dfa.alphabet().len()).filter_map(|a| dfa.delta(q, a)).map(|t| counts[r - 1][t]).sum())
                .collect();
            counts.push(row);
        }
        PathSampler { dfa, counts }
    }

    fn sample<R: Rng>(&self, rng: &mut R, len: usize) -> Option<Vec<Sym>> {
        let mut q = self.dfa.initial();
        if self.counts[len][q] == 0.0 {
            return None;
        }
        let mut w = Vec::with_capacity(len);
        for r in (0..len).rev() {
            let options: Vec<(Sym, usize)> = (0..self.dfa.alphabet().len())
                .filter_map(|a| self.dfa.delta(q, a).map(|t| (a, t)))
                .filter(|&(_, t)| self.counts[r][t] > 0.0)
                .collect();
            let &(a, t) = options
                .choose_weighted(rng, |&(_, t)| self.counts[r][t])
                .expect("positive count implies a live continuation");
            w.push(a);
            q = t;
        }
        Some(w)
    }
}

/// DFA for strings with exactly one occurrence of the factor `ab` (or `a`).
fn exactly_one_occurrence(id: LanguageId) -> Dfa {
    let al = id.alphabet();
    let d = if id == LanguageId::Lt1 {
        Dfa::new(al, &["z", "o"], "z", &["o"], &[("z", "b", "z"), ("z", "a", "o"), ("o", "b", "o")])
    } else {
        // z/o: zero/one occurrences so far; the `a` suffix marks a pending a
        Dfa::new(
            al,
            &["z", "za", "o", "oa"],
            "z",
            &["o", "oa"],
            &[
                ("z", "a", "za"),
                ("z", "b", "z"),
                ("z", "c", "z"),
                ("za", "a", "za"),
                ("za", "b", "o"),
                ("za", "c", "z"),
                ("o", "a", "oa"),
                ("o", "b", "o"),
                ("o", "c", "o"),
                ("oa", "a", "oa"),
                ("oa", "c", "o"),
            ],
        )
    };
    d.expect("built-in automata are valid")
}

fn sample_from<R: Rng>(rng: &mut R, dfa: &Dfa, len: usize) -> Option<Vec<Sym>> {
    PathSampler::new(dfa, len).sample(rng, len)
}

/// A single-symbol substitution of `w` that leaves the language, if any.
fn corrupt<R: Rng>(rng: &mut R, id: LanguageId, w: &[Sym]) -> Option<Vec<Sym>> {
    let k = id.symbols().len();
    let mut options = Vec::new();
    for i in 0..w.len() {
        for s in (0..k).filter(|&s| s != w[i]) {
            let mut v = w.to_vec();
            v[i] = s;
            if !member(id, &v) {
                options.push(v);
            }
        }
    }
    options.choose(rng).cloned()
}

fn uniform_word<R: Rng>(rng: &mut R, k: usize, len: usize) -> Vec<Sym> {
    (0..len).map(|_| rng.gen_range(0..k)).collect()
}

/// Generates one sample of the given polarity and length; deterministic in
/// `(id, length, positive, seed)`.
pub fn generate(id: LanguageId, length: usize, positive: bool, seed: u64) -> Result<Vec<Sym>, LangError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((id as u64) << 56) ^ ((positive as u64) << 55));
    let infeasible =
        || LangError::Infeasible { lang: id, length, polarity: if positive { "positive" } else { "negative" } };
    let (a, b) = (0, 1);
    let w = match id {
        LanguageId::Cnt => {
            if positive {
                if length % 2 == 1 {
                    return Err(infeasible());
                }
                let n = length / 2;
                [vec![a; n], vec![b; n]].concat()
            } else {
                // a^n b^n with one a or one b removed
                if length % 2 == 0 {
                    return Err(infeasible());
                }
                let n = (length + 1) / 2;
                if rng.gen_bool(0.5) {
                    [vec![a; n - 1], vec![b; n]].concat()
                } else {
                    [vec![a; n], vec![b; n - 1]].concat()
                }
            }
        }
        LanguageId::Parity => {
            let mut w = uniform_word(&mut rng, 2, length);
            let odd = w.iter().filter(|&&s| s == b).count() % 2 == 1;
            if odd == positive {
                if length == 0 {
                    return Err(infeasible());
                }
                let i = rng.gen_range(0..length);
                w[i] = 1 - w[i];
            }
            w
        }
        LanguageId::Dyck11 | LanguageId::Dyck12 => {
            if length % 2 == 1 {
                return Err(infeasible());
            }
            let dfa = reference_dfa(id)?;
            let pos = sample_from(&mut rng, &dfa, length).ok_or_else(infeasible)?;
            if positive {
                pos
            } else {
                // flip one symbol; every flip changes the balance, but retry defensively
                let mut order: Vec<usize> = (0..length).collect();
                order.shuffle(&mut rng);
                order
                    .into_iter()
                    .map(|i| {
                        let mut v = pos.clone();
                        v[i] = 1 - v[i];
                        v
                    })
                    .find(|v| !member(id, v))
                    .ok_or_else(infeasible)?
            }
        }
        LanguageId::Lt1 | LanguageId::Lt2 => {
            let dfa = if positive { exactly_one_occurrence(id) } else { reference_dfa(id)?.complement() };
            sample_from(&mut rng, &dfa, length).ok_or_else(infeasible)?
        }
        LanguageId::Rdp1 | LanguageId::Ldp1 | LanguageId::Ldp2 => {
            let dfa = reference_dfa(id)?;
            if positive {
                sample_from(&mut rng, &dfa, length).ok_or_else(infeasible)?
            } else {
                let mut found = None;
                for _ in 0..64 {
                    let Some(pos) = sample_from(&mut rng, &dfa, length) else { break };
                    if let Some(v) = corrupt(&mut rng, id, &pos) {
                        found = Some(v);
                        break;
                    }
                }
                match found {
                    Some(v) => v,
                    // no positive of this length (e.g. the empty string)
                    None => sample_from(&mut rng, &dfa.complement(), length).ok_or_else(infeasible)?,
                }
            }
        }
        LanguageId::Last | LanguageId::First => {
            if length == 0 {
                if positive {
                    return Err(infeasible());
                }
                Vec::new()
            } else {
                let mut w = uniform_word(&mut rng, 2, length);
                let i = if id == LanguageId::Last { length - 1 } else { 0 };
                w[i] = if positive { b } else { a };
                w
            }
        }
        LanguageId::Pt2 | LanguageId::BbStar => {
            let dfa = reference_dfa(id)?;
            let dfa = if positive { dfa } else { dfa.complement() };
            sample_from(&mut rng, &dfa, length).ok_or_else(infeasible)?
        }
    };
    debug_assert_eq!(w.len(), length);
    if member(id, &w) != positive {
        return Err(infeasible());
    }
    Ok(w)
}

/// One generated sample, as emitted in JSONL corpora.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub lang: LanguageId,
    pub string: String,
    pub label: bool,
    pub seed: u64,
}

impl LabeledSample {
    pub fn length(&self) -> usize {
        self.lang.alphabet().parse_word(&self.string).map(|w| w.len()).unwrap_or(0)
    }

    pub fn to_tsv(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.lang, self.string, self.label as u8, self.seed)
    }
}

/// `count` samples per polarity at each length; infeasible combinations are skipped.
pub fn corpus(id: LanguageId, lengths: &[usize], count: usize, seed: u64) -> Vec<LabeledSample> {
    let al = id.alphabet();
    let mut out = Vec::new();
    for &len in lengths {
        for positive in [true, false] {
            for i in 0..count {
                let s = seed.wrapping_add((len as u64) << 32).wrapping_add(i as u64);
                if let Ok(w) = generate(id, len, positive, s) {
                    out.push(LabeledSample { lang: id, string: al.format_word(&w), label: positive, seed: s });
                }
            }
        }
    }
    out
}
