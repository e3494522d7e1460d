use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::alphabet::{Alphabet, Sym};

use super::LogicError;

/// Formula of LTL\[P,F,S,U\]. Children are shared, so formulas built by the
/// compilers are DAGs whose tree unfolding may be much larger than their
/// memory footprint.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Ltl {
    Atom(String),
    True,
    False,
    Not(Arc<Ltl>),
    And(Arc<Ltl>, Arc<Ltl>),
    Or(Arc<Ltl>, Arc<Ltl>),
    Past(Arc<Ltl>),
    Future(Arc<Ltl>),
    Since(Arc<Ltl>, Arc<Ltl>),
    Until(Arc<Ltl>, Arc<Ltl>),
}

/// Where whole-string satisfaction is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Position `N + 1`, just past the last symbol.
    AfterEnd,
    /// Position `0`, just before the first symbol.
    BeforeStart,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "after_end" | "after-end" => Ok(Mode::AfterEnd),
            "before_start" | "before-start" => Ok(Mode::BeforeStart),
            _ => Err(format!("unknown mode '{s}' (expected after_end or before_start)")),
        }
    }
}

impl Ltl {
    pub fn atom(s: impl Into<String>) -> Arc<Ltl> {
        Arc::new(Ltl::Atom(s.into()))
    }

    pub fn tt() -> Arc<Ltl> {
        Arc::new(Ltl::True)
    }

    pub fn ff() -> Arc<Ltl> {
        Arc::new(Ltl::False)
    }

    pub fn not(a: Arc<Ltl>) -> Arc<Ltl> {
        Arc::new(Ltl::Not(a))
    }

    pub fn and(a: Arc<Ltl>, b: Arc<Ltl>) -> Arc<Ltl> {
        Arc::new(Ltl::And(a, b))
    }

    pub fn or(a: Arc<Ltl>, b: Arc<Ltl>) -> Arc<Ltl> {
        Arc::new(Ltl::Or(a, b))
    }

    pub fn past(a: Arc<Ltl>) -> Arc<Ltl> {
        Arc::new(Ltl::Past(a))
    }

    pub fn future(a: Arc<Ltl>) -> Arc<Ltl> {
        Arc::new(Ltl::Future(a))
    }

    pub fn since(a: Arc<Ltl>, b: Arc<Ltl>) -> Arc<Ltl> {
        Arc::new(Ltl::Since(a, b))
    }

    pub fn until(a: Arc<Ltl>, b: Arc<Ltl>) -> Arc<Ltl> {
        Arc::new(Ltl::Until(a, b))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn and_all<I: IntoIterator<Item = Arc<Ltl>>>(items: I) -> Arc<Ltl> {
        items.into_iter().reduce(Ltl::and).unwrap_or_else(Ltl::tt)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn or_all<I: IntoIterator<Item = Arc<Ltl>>>(items: I) -> Arc<Ltl> {
        items.into_iter().reduce(Ltl::or).unwrap_or_else(Ltl::ff)
    }

    pub fn children(&self) -> Vec<&Arc<Ltl>> {
        match self {
            Ltl::Atom(_) | Ltl::True | Ltl::False => vec![],
            Ltl::Not(a) | Ltl::Past(a) | Ltl::Future(a) => vec![a],
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Since(a, b) | Ltl::Until(a, b) => vec![a, b],
        }
    }

    /// Visits every distinct node once (by address).
    fn any_node(&self, pred: &dyn Fn(&Ltl) -> bool) -> bool {
        fn go(f: &Ltl, pred: &dyn Fn(&Ltl) -> bool, seen: &mut std::collections::HashSet<usize>) -> bool {
            if !seen.insert(f as *const Ltl as usize) {
                return false;
            }
            pred(f) || f.children().into_iter().any(|c| go(c, pred, seen))
        }
        go(self, pred, &mut Default::default())
    }

    /// No `F`, `S` or `U` anywhere.
    pub fn is_ptl(&self) -> bool {
        !self.any_node(&|f| matches!(f, Ltl::Future(_) | Ltl::Since(..) | Ltl::Until(..)))
    }

    /// No `F` or `U` anywhere (`S` allowed).
    pub fn is_past_only(&self) -> bool {
        !self.any_node(&|f| matches!(f, Ltl::Future(_) | Ltl::Until(..)))
    }

    /// Conventional whole-string mode: past-only formulas are read at the
    /// end, anything mentioning the future at the start.
    pub fn default_mode(&self) -> Mode {
        if self.is_past_only() {
            Mode::AfterEnd
        } else {
            Mode::BeforeStart
        }
    }

    /// Maximum nesting of temporal operators.
    pub fn operator_depth(&self) -> usize {
        let mut memo = HashMap::new();
        depth_memo(self, &mut memo)
    }

    /// Symbols mentioned by atoms, in first-occurrence order.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn go(f: &Ltl, out: &mut Vec<String>, seen: &mut std::collections::HashSet<usize>) {
            if !seen.insert(f as *const Ltl as usize) {
                return;
            }
            if let Ltl::Atom(s) = f {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            for c in f.children() {
                go(c, out, seen);
            }
        }
        go(self, &mut out, &mut Default::default());
        out
    }

    /// Errors on the first atom outside `alphabet`.
    pub fn check_alphabet(&self, alphabet: &Alphabet) -> Result<(), LogicError> {
        for a in self.atoms() {
            if alphabet.index(&a).is_none() {
                return Err(LogicError::UnknownSymbol(a));
            }
        }
        Ok(())
    }

    fn prec(&self) -> u8 {
        match self {
            Ltl::Or(..) => 1,
            Ltl::And(..) => 2,
            Ltl::Since(..) | Ltl::Until(..) => 3,
            Ltl::Not(_) | Ltl::Past(_) | Ltl::Future(_) => 4,
            Ltl::Atom(_) | Ltl::True | Ltl::False => 5,
        }
    }
}

fn depth_memo(f: &Ltl, memo: &mut HashMap<usize, usize>) -> usize {
    let key = f as *const Ltl as usize;
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let d = match f {
        Ltl::Atom(_) | Ltl::True | Ltl::False => 0,
        Ltl::Not(a) => depth_memo(a, memo),
        Ltl::And(a, b) | Ltl::Or(a, b) => depth_memo(a, memo).max(depth_memo(b, memo)),
        Ltl::Past(a) | Ltl::Future(a) => depth_memo(a, memo) + 1,
        Ltl::Since(a, b) | Ltl::Until(a, b) => depth_memo(a, memo).max(depth_memo(b, memo)) + 1,
    };
    memo.insert(key, d);
    d
}

fn write_child(f: &mut fmt::Formatter<'_>, c: &Ltl, min: u8) -> fmt::Result {
    if c.prec() < min {
        write!(f, "({c})")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ltl::Atom(s) => write!(f, "{s}"),
            Ltl::True => write!(f, "true"),
            Ltl::False => write!(f, "false"),
            Ltl::Not(a) => {
                write!(f, "!")?;
                write_child(f, a, 4)
            }
            Ltl::Past(a) | Ltl::Future(a) => {
                write!(f, "{} ", if matches!(self, Ltl::Past(_)) { "P" } else { "F" })?;
                write_child(f, a, 4)
            }
            Ltl::And(a, b) | Ltl::Or(a, b) => {
                let p = self.prec();
                write_child(f, a, p)?;
                write!(f, " {} ", if p == 2 { "&" } else { "|" })?;
                write_child(f, b, p + 1)
            }
            Ltl::Since(a, b) | Ltl::Until(a, b) => {
                write_child(f, a, 4)?;
                write!(f, " {} ", if matches!(self, Ltl::Since(..)) { "S" } else { "U" })?;
                write_child(f, b, 4)
            }
        }
    }
}

/// Operator of a hash-consed formula node; children are node ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Atom(Sym),
    True,
    False,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Past(usize),
    Future(usize),
    Since(usize, usize),
    Until(usize, usize),
}

impl Node {
    pub fn children(&self) -> Vec<usize> {
        match *self {
            Node::Atom(_) | Node::True | Node::False => vec![],
            Node::Not(a) | Node::Past(a) | Node::Future(a) => vec![a],
            Node::And(a, b) | Node::Or(a, b) | Node::Since(a, b) | Node::Until(a, b) => vec![a, b],
        }
    }
}

/// Hash-consed formula: structurally equal subformulas share one node and
/// every child id is smaller than its parent's.
#[derive(Debug, Clone)]
pub struct LtlDag {
    pub nodes: Vec<Node>,
    pub root: usize,
    pub alphabet: Alphabet,
}

impl LtlDag {
    pub fn build(f: &Ltl, alphabet: &Alphabet) -> Result<Self, LogicError> {
        let mut b = DagBuilder { alphabet, nodes: Vec::new(), by_node: HashMap::new(), by_ptr: HashMap::new() };
        let root = b.visit(f)?;
        Ok(LtlDag { nodes: b.nodes, root, alphabet: alphabet.clone() })
    }

    /// Truth table of every node over positions `0..=N+1`.
    pub fn eval_all(&self, w: &[Sym]) -> Vec<Vec<bool>> {
        let n = w.len();
        let mut t: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let row: Vec<bool> = match *node {
                Node::Atom(s) => (0..=n + 1).map(|p| p >= 1 && p <= n && w[p - 1] == s).collect(),
                Node::True => vec![true; n + 2],
                Node::False => vec![false; n + 2],
                Node::Not(a) => t[a].iter().map(|v| !v).collect(),
                Node::And(a, b) => t[a].iter().zip(&t[b]).map(|(x, y)| *x && *y).collect(),
                Node::Or(a, b) => t[a].iter().zip(&t[b]).map(|(x, y)| *x || *y).collect(),
                Node::Past(a) => {
                    let mut row = vec![false; n + 2];
                    for p in 1..=n + 1 {
                        row[p] = row[p - 1] || (p - 1 >= 1 && t[a][p - 1]);
                    }
                    row
                }
                Node::Future(a) => {
                    let mut row = vec![false; n + 2];
                    for p in (0..=n).rev() {
                        row[p] = row[p + 1] || (p + 1 <= n && t[a][p + 1]);
                    }
                    row
                }
                Node::Since(a, b) => {
                    let mut row = vec![false; n + 2];
                    for p in 2..=n + 1 {
                        row[p] = t[b][p - 1] || (t[a][p - 1] && row[p - 1]);
                    }
                    row
                }
                Node::Until(a, b) => {
                    let mut row = vec![false; n + 2];
                    for p in (0..n).rev() {
                        row[p] = t[b][p + 1] || (t[a][p + 1] && row[p + 1]);
                    }
                    row
                }
            };
            t.push(row);
        }
        t
    }

    pub fn eval_root(&self, w: &[Sym]) -> Vec<bool> {
        self.eval_all(w).swap_remove(self.root)
    }
}

struct DagBuilder<'a> {
    alphabet: &'a Alphabet,
    nodes: Vec<Node>,
    by_node: HashMap<Node, usize>,
    by_ptr: HashMap<usize, usize>,
}

impl DagBuilder<'_> {
    fn visit(&mut self, f: &Ltl) -> Result<usize, LogicError> {
        let key = f as *const Ltl as usize;
        if let Some(&id) = self.by_ptr.get(&key) {
            return Ok(id);
        }
        let node = match f {
            Ltl::Atom(s) => Node::Atom(self.alphabet.index(s).ok_or_else(|| LogicError::UnknownSymbol(s.clone()))?),
            Ltl::True => Node::True,
            Ltl::False => Node::False,
            Ltl::Not(a) => Node::Not(self.visit(a)?),
            Ltl::And(a, b) => Node::And(self.visit(a)?, self.visit(b)?),
            Ltl::Or(a, b) => Node::Or(self.visit(a)?, self.visit(b)?),
            Ltl::Past(a) => Node::Past(self.visit(a)?),
            Ltl::Future(a) => Node::Future(self.visit(a)?),
            Ltl::Since(a, b) => Node::Since(self.visit(a)?, self.visit(b)?),
            Ltl::Until(a, b) => Node::Until(self.visit(a)?, self.visit(b)?),
        };
        let id = match self.by_node.get(&node) {
            Some(&id) => id,
            None => {
                self.nodes.push(node);
                self.by_node.insert(node, self.nodes.len() - 1);
                self.nodes.len() - 1
            }
        };
        self.by_ptr.insert(key, id);
        Ok(id)
    }
}

/// Truth of `φ` at position `n ∈ 0..=|w|+1` (0 and `|w|+1` lie outside `w`).
pub fn eval_ltl(phi: &Ltl, alphabet: &Alphabet, w: &[Sym], n: usize) -> Result<bool, LogicError> {
    if n > w.len() + 1 {
        return Err(LogicError::PositionOutOfRange { n, len: w.len() });
    }
    Ok(LtlDag::build(phi, alphabet)?.eval_root(w)[n])
}

/// Whole-string satisfaction at `|w| + 1` or `0`.
pub fn satisfies_ltl(phi: &Ltl, alphabet: &Alphabet, w: &[Sym], mode: Mode) -> Result<bool, LogicError> {
    let dag = LtlDag::build(phi, alphabet)?;
    Ok(dag.satisfies(w, mode))
}

impl LtlDag {
    pub fn satisfies(&self, w: &[Sym], mode: Mode) -> bool {
        let row = self.eval_root(w);
        match mode {
            Mode::AfterEnd => row[w.len() + 1],
            Mode::BeforeStart => row[0],
        }
    }
}
