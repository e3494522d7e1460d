use std::fmt;
use std::sync::Arc;

use crate::alphabet::{Alphabet, Sym};

use super::ltl::Ltl;
use super::LogicError;

/// Default cap on threshold-quantifier counts.
pub const K_MAX: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::X => "x",
            Var::Y => "y",
        })
    }
}

/// Two-variable first-order formula with past-bounded quantifiers.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Pfo {
    Atom(String, Var),
    Less(Var, Var),
    Not(Box<Pfo>),
    And(Box<Pfo>, Box<Pfo>),
    Or(Box<Pfo>, Box<Pfo>),
    /// `∃bound < free: body`
    ExistsLess(Var, Var, Box<Pfo>),
    /// `∃v: body`, ranging over the positions of the string.
    Exists(Var, Box<Pfo>),
}

/// Comparator of a threshold counting quantifier.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Threshold {
    AtLeast,
    Exactly,
}

impl Pfo {
    pub fn atom(s: impl Into<String>, v: Var) -> Pfo {
        Pfo::Atom(s.into(), v)
    }

    pub fn not(a: Pfo) -> Pfo {
        Pfo::Not(Box::new(a))
    }

    pub fn and(a: Pfo, b: Pfo) -> Pfo {
        Pfo::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pfo, b: Pfo) -> Pfo {
        Pfo::Or(Box::new(a), Box::new(b))
    }

    pub fn exists_less(bound: Var, free: Var, body: Pfo) -> Pfo {
        Pfo::ExistsLess(bound, free, Box::new(body))
    }

    pub fn exists(v: Var, body: Pfo) -> Pfo {
        Pfo::Exists(v, Box::new(body))
    }

    /// Always false with `v` free: `v < v`.
    pub fn falsum(v: Var) -> Pfo {
        Pfo::Less(v, v)
    }

    /// Always true with `v` free: `!(v < v)`.
    pub fn verum(v: Var) -> Pfo {
        Pfo::not(Pfo::Less(v, v))
    }

    /// The closed sentence `E x. x < x`.
    pub fn false_sentence() -> Pfo {
        Pfo::exists(Var::X, Pfo::falsum(Var::X))
    }

    /// Free variables as a two-slot mask.
    pub fn free_vars(&self) -> [bool; 2] {
        match self {
            Pfo::Atom(_, v) => {
                let mut m = [false; 2];
                m[v.slot()] = true;
                m
            }
            Pfo::Less(a, b) => {
                let mut m = [false; 2];
                m[a.slot()] = true;
                m[b.slot()] = true;
                m
            }
            Pfo::Not(a) => a.free_vars(),
            Pfo::And(a, b) | Pfo::Or(a, b) => {
                let (p, q) = (a.free_vars(), b.free_vars());
                [p[0] || q[0], p[1] || q[1]]
            }
            Pfo::ExistsLess(bound, free, body) => {
                let mut m = body.free_vars();
                m[bound.slot()] = false;
                m[free.slot()] = true;
                m
            }
            Pfo::Exists(v, body) => {
                let mut m = body.free_vars();
                m[v.slot()] = false;
                m
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars() == [false, false]
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Pfo::Atom(..) | Pfo::Less(..) => 0,
            Pfo::Not(a) => a.quantifier_depth(),
            Pfo::And(a, b) | Pfo::Or(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            Pfo::ExistsLess(_, _, a) | Pfo::Exists(_, a) => a.quantifier_depth() + 1,
        }
    }

    /// Swaps `x` and `y` everywhere (a consistent renaming).
    pub fn swap_vars(&self) -> Pfo {
        match self {
            Pfo::Atom(s, v) => Pfo::Atom(s.clone(), v.other()),
            Pfo::Less(a, b) => Pfo::Less(a.other(), b.other()),
            Pfo::Not(a) => Pfo::not(a.swap_vars()),
            Pfo::And(a, b) => Pfo::and(a.swap_vars(), b.swap_vars()),
            Pfo::Or(a, b) => Pfo::or(a.swap_vars(), b.swap_vars()),
            Pfo::ExistsLess(b, f, body) => Pfo::exists_less(b.other(), f.other(), body.swap_vars()),
            Pfo::Exists(v, body) => Pfo::exists(v.other(), body.swap_vars()),
        }
    }

    fn atoms_into(&self, out: &mut Vec<String>) {
        match self {
            Pfo::Atom(s, _) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Pfo::Less(..) => {}
            Pfo::Not(a) | Pfo::ExistsLess(_, _, a) | Pfo::Exists(_, a) => a.atoms_into(out),
            Pfo::And(a, b) | Pfo::Or(a, b) => {
                a.atoms_into(out);
                b.atoms_into(out);
            }
        }
    }

    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.atoms_into(&mut out);
        out
    }

    fn prec(&self) -> u8 {
        match self {
            Pfo::ExistsLess(..) | Pfo::Exists(..) => 0,
            Pfo::Or(..) => 1,
            Pfo::And(..) => 2,
            Pfo::Not(_) => 4,
            Pfo::Atom(..) | Pfo::Less(..) => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, c: &Pfo, min: u8) -> fmt::Result {
    if c.prec() < min {
        write!(f, "({c})")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for Pfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pfo::Atom(s, v) => write!(f, "{s}({v})"),
            Pfo::Less(a, b) => write!(f, "{a} < {b}"),
            Pfo::Not(a) => {
                write!(f, "!")?;
                write_child(f, a, 4)
            }
            Pfo::And(a, b) | Pfo::Or(a, b) => {
                let p = self.prec();
                write_child(f, a, p)?;
                write!(f, " {} ", if p == 2 { "&" } else { "|" })?;
                write_child(f, b, p + 1)
            }
            Pfo::ExistsLess(b, v, body) => write!(f, "E {b}<{v}. {body}"),
            Pfo::Exists(v, body) => write!(f, "E {v}. {body}"),
        }
    }
}

/// Checks the two structural restrictions of the past fragment: a bounded
/// quantifier never compares its variable with itself, and an unbounded one
/// closes its body completely.
pub fn is_pfo(phi: &Pfo) -> bool {
    match phi {
        Pfo::Atom(..) | Pfo::Less(..) => true,
        Pfo::Not(a) => is_pfo(a),
        Pfo::And(a, b) | Pfo::Or(a, b) => is_pfo(a) && is_pfo(b),
        Pfo::ExistsLess(b, v, body) => b != v && is_pfo(body),
        Pfo::Exists(v, body) => {
            let fv = body.free_vars();
            !fv[v.other().slot()] && is_pfo(body)
        }
    }
}

/// Satisfaction with positions `1..=|w|+1` for free variables; quantifiers
/// range over the string positions `1..=|w|`.
pub fn eval_pfo(phi: &Pfo, alphabet: &Alphabet, w: &[Sym], assignment: [Option<usize>; 2]) -> Result<bool, LogicError> {
    let fv = phi.free_vars();
    for v in [Var::X, Var::Y] {
        if fv[v.slot()] {
            match assignment[v.slot()] {
                None => return Err(LogicError::UnassignedVariable(v.to_string())),
                Some(p) if p == 0 || p > w.len() + 1 => {
                    return Err(LogicError::PositionOutOfRange { n: p, len: w.len() })
                }
                _ => {}
            }
        }
    }
    let syms = phi
        .atoms()
        .into_iter()
        .map(|s| alphabet.index(&s).map(|i| (s.clone(), i)).ok_or(LogicError::UnknownSymbol(s)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut asg = [assignment[0].unwrap_or(0), assignment[1].unwrap_or(0)];
    Ok(eval_rec(phi, &syms, w, &mut asg))
}

fn eval_rec(phi: &Pfo, syms: &[(String, Sym)], w: &[Sym], asg: &mut [usize; 2]) -> bool {
    match phi {
        Pfo::Atom(s, v) => {
            let p = asg[v.slot()];
            let sym = syms.iter().find(|(n, _)| n == s).unwrap().1;
            p >= 1 && p <= w.len() && w[p - 1] == sym
        }
        Pfo::Less(a, b) => asg[a.slot()] < asg[b.slot()],
        Pfo::Not(a) => !eval_rec(a, syms, w, asg),
        Pfo::And(a, b) => eval_rec(a, syms, w, asg) && eval_rec(b, syms, w, asg),
        Pfo::Or(a, b) => eval_rec(a, syms, w, asg) || eval_rec(b, syms, w, asg),
        Pfo::ExistsLess(b, v, body) => {
            let bound = asg[v.slot()];
            let saved = asg[b.slot()];
            let mut found = false;
            for p in 1..bound.min(w.len() + 1) {
                asg[b.slot()] = p;
                if eval_rec(body, syms, w, asg) {
                    found = true;
                    break;
                }
            }
            asg[b.slot()] = saved;
            found
        }
        Pfo::Exists(v, body) => {
            let saved = asg[v.slot()];
            let mut found = false;
            for p in 1..=w.len() {
                asg[v.slot()] = p;
                if eval_rec(body, syms, w, asg) {
                    found = true;
                    break;
                }
            }
            asg[v.slot()] = saved;
            found
        }
    }
}

/// Structural translation of a PTL formula into a PFO formula with `x` free.
pub fn ptl_to_pfo(phi: &Ltl) -> Result<Pfo, LogicError> {
    if !phi.is_ptl() {
        return Err(LogicError::NotPtl);
    }
    Ok(ptl_to_pfo_at(phi, Var::X))
}

fn ptl_to_pfo_at(phi: &Ltl, v: Var) -> Pfo {
    match phi {
        Ltl::Atom(s) => Pfo::atom(s.clone(), v),
        Ltl::True => Pfo::verum(v),
        Ltl::False => Pfo::falsum(v),
        Ltl::Not(a) => Pfo::not(ptl_to_pfo_at(a, v)),
        Ltl::And(a, b) => Pfo::and(ptl_to_pfo_at(a, v), ptl_to_pfo_at(b, v)),
        Ltl::Or(a, b) => Pfo::or(ptl_to_pfo_at(a, v), ptl_to_pfo_at(b, v)),
        Ltl::Past(a) => Pfo::exists_less(v.other(), v, ptl_to_pfo_at(a, v.other())),
        Ltl::Future(_) | Ltl::Since(..) | Ltl::Until(..) => unreachable!("checked by is_ptl"),
    }
}

/// Sentence defining the language of a PTL formula read at position `N + 1`.
///
/// At `N + 1` every atom is false and `P ψ` asks for some string position
/// satisfying `ψ`, i.e. `∃x: ψ(x)`; Boolean structure is kept as is.
pub fn language_sentence(phi: &Ltl) -> Result<Pfo, LogicError> {
    if !phi.is_ptl() {
        return Err(LogicError::NotPtl);
    }
    fn go(phi: &Ltl) -> Pfo {
        match phi {
            Ltl::Atom(_) | Ltl::False => Pfo::false_sentence(),
            Ltl::True => Pfo::not(Pfo::false_sentence()),
            Ltl::Not(a) => Pfo::not(go(a)),
            Ltl::And(a, b) => Pfo::and(go(a), go(b)),
            Ltl::Or(a, b) => Pfo::or(go(a), go(b)),
            Ltl::Past(a) => Pfo::exists(Var::X, ptl_to_pfo_at(a, Var::X)),
            _ => unreachable!("checked by is_ptl"),
        }
    }
    Ok(go(phi))
}

/// Translates a past-fragment formula whose only free variable is `free`
/// into an equivalent PTL formula.
pub fn pfo_to_ptl(phi: &Pfo, alphabet: &Alphabet, free: Var) -> Result<Arc<Ltl>, LogicError> {
    if !is_pfo(phi) {
        return Err(LogicError::NotPastFragment(format!("'{phi}' is outside the past fragment")));
    }
    if phi.free_vars()[free.other().slot()] {
        return Err(LogicError::NotPastFragment(format!("'{phi}' has {} free", free.other())));
    }
    for a in phi.atoms() {
        alphabet.require(&a).map_err(|_| LogicError::UnknownSymbol(a.clone()))?;
    }
    tr(phi, alphabet, free)
}

/// Translates a past-fragment sentence into a PTL formula read at `N + 1`.
pub fn pfo_sentence_to_ptl(phi: &Pfo, alphabet: &Alphabet) -> Result<Arc<Ltl>, LogicError> {
    if !is_pfo(phi) || !phi.is_sentence() {
        return Err(LogicError::NotPastFragment(format!("'{phi}' is not a past-fragment sentence")));
    }
    fn go(phi: &Pfo, alphabet: &Alphabet) -> Result<Arc<Ltl>, LogicError> {
        match phi {
            Pfo::Not(a) => Ok(Ltl::not(go(a, alphabet)?)),
            Pfo::And(a, b) => Ok(Ltl::and(go(a, alphabet)?, go(b, alphabet)?)),
            Pfo::Or(a, b) => Ok(Ltl::or(go(a, alphabet)?, go(b, alphabet)?)),
            Pfo::Exists(v, body) => Ok(Ltl::past(pfo_to_ptl(body, alphabet, *v)?)),
            other => Err(LogicError::NotPastFragment(format!("unexpected '{other}' at sentence level"))),
        }
    }
    go(phi, alphabet)
}

fn mentions_free(phi: &Pfo, v: Var) -> bool {
    phi.free_vars()[v.slot()]
}

fn tr(phi: &Pfo, alphabet: &Alphabet, v: Var) -> Result<Arc<Ltl>, LogicError> {
    Ok(match phi {
        Pfo::Atom(s, u) => {
            debug_assert_eq!(*u, v);
            Ltl::atom(s.clone())
        }
        // only `v < v` can occur with a single free variable
        Pfo::Less(..) => Ltl::ff(),
        Pfo::Not(a) => Ltl::not(tr(a, alphabet, v)?),
        Pfo::And(a, b) => Ltl::and(tr(a, alphabet, v)?, tr(b, alphabet, v)?),
        Pfo::Or(a, b) => Ltl::or(tr(a, alphabet, v)?, tr(b, alphabet, v)?),
        Pfo::ExistsLess(b, _, body) => {
            let b = *b;
            if !mentions_free(body, v) {
                Ltl::past(tr(body, alphabet, b)?)
            } else {
                // case split on the symbol at the outer position (or none,
                // beyond the end) so the body no longer refers to it
                let mut cases = Vec::new();
                for c in 0..=alphabet.len() {
                    let cur = (c < alphabet.len()).then_some(c);
                    let body_c = specialize(body, alphabet, v, b, cur);
                    let here = match cur {
                        Some(c) => Ltl::atom(alphabet.name(c)),
                        None => Ltl::not(Ltl::or_all(alphabet.symbols().iter().map(Ltl::atom))),
                    };
                    cases.push(Ltl::and(here, Ltl::past(tr(&body_c, alphabet, b)?)));
                }
                Ltl::or_all(cases)
            }
        }
        Pfo::Exists(..) => {
            return Err(LogicError::NotPastFragment("nested sentence inside a positional formula".into()))
        }
    })
}

/// Replaces free occurrences of the outer variable `v` inside the body of
/// `∃b < v`, given the symbol at `v`'s position and `b < v`.
fn specialize(phi: &Pfo, alphabet: &Alphabet, v: Var, b: Var, cur: Option<Sym>) -> Pfo {
    let t = Pfo::verum(b);
    let f = Pfo::falsum(b);
    match phi {
        Pfo::Atom(s, u) if *u == v => {
            if cur.is_some_and(|c| alphabet.name(c) == s) {
                t
            } else {
                f
            }
        }
        Pfo::Atom(..) => phi.clone(),
        Pfo::Less(p, q) => {
            if *p == b && *q == v {
                t
            } else if p == q && *p == b {
                phi.clone()
            } else {
                f
            }
        }
        Pfo::Not(a) => Pfo::not(specialize(a, alphabet, v, b, cur)),
        Pfo::And(x, y) => Pfo::and(specialize(x, alphabet, v, b, cur), specialize(y, alphabet, v, b, cur)),
        Pfo::Or(x, y) => Pfo::or(specialize(x, alphabet, v, b, cur), specialize(y, alphabet, v, b, cur)),
        // `∃v < b` rebinds v, so nothing below refers to the outer v
        Pfo::ExistsLess(q, _, _) if *q == v => phi.clone(),
        Pfo::ExistsLess(q, r, body) => Pfo::exists_less(*q, *r, specialize(body, alphabet, v, b, cur)),
        Pfo::Exists(q, _) if *q == v => phi.clone(),
        Pfo::Exists(q, body) => Pfo::exists(*q, specialize(body, alphabet, v, b, cur)),
    }
}

/// `∃^{≥k} y < x: body(y)` (or `=k`) by alternating nested quantifiers.
///
/// `body` must have only `y` free; the result has only `x` free.
pub fn threshold_exists(k: usize, cmp: Threshold, body: &Pfo) -> Result<Pfo, LogicError> {
    threshold_exists_capped(k, cmp, body, K_MAX)
}

pub fn threshold_exists_capped(k: usize, cmp: Threshold, body: &Pfo, cap: usize) -> Result<Pfo, LogicError> {
    if k == 0 || k > cap {
        return Err(LogicError::ThresholdCap { k, cap });
    }
    if body.free_vars()[Var::X.slot()] {
        return Err(LogicError::NotPastFragment("threshold body must only have y free".into()));
    }
    Ok(match cmp {
        Threshold::AtLeast => at_least(k, body),
        Threshold::Exactly => Pfo::and(at_least(k, body), Pfo::not(at_least(k + 1, body))),
    })
}

fn at_least(k: usize, body_y: &Pfo) -> Pfo {
    // innermost level first; level i binds y when i is odd from the top
    let body_x = body_y.swap_vars();
    let mut acc: Option<Pfo> = None;
    for level in (0..k).rev() {
        let (bound, free, b) = if level % 2 == 0 { (Var::Y, Var::X, body_y) } else { (Var::X, Var::Y, &body_x) };
        let inner = match acc.take() {
            None => b.clone(),
            Some(rest) => Pfo::and(b.clone(), rest),
        };
        acc = Some(Pfo::exists_less(bound, free, inner));
    }
    acc.unwrap()
}
