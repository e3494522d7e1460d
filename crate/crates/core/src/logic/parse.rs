//! Recursive-descent parsers for the LTL and PFO text syntaxes.

use std::sync::Arc;

use crate::alphabet::Alphabet;

use super::ltl::Ltl;
use super::pfo::{Pfo, Var};
use super::LogicError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Bang,
    Amp,
    Bar,
    Lt,
    Dot,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '!' | '~' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '<' => Tok::Lt,
            '.' | ':' => Tok::Dot,
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                out.push((pos, Tok::Ident(s)));
                continue;
            }
            other => return Err(LogicError::Syntax { pos, msg: format!("unexpected character '{other}'") }),
        };
        out.push((pos, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn new(text: &str, alphabet: &'a Alphabet) -> Result<Self, LogicError> {
        Ok(Parser { toks: lex(text)?, i: 0, end: text.len(), alphabet })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.i + 1).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LogicError> {
        Err(LogicError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(_, t)| t.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&t) {
            self.i += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn finish(&self) -> Result<(), LogicError> {
        if self.i < self.toks.len() {
            self.err("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    fn symbol(&self, name: &str) -> Result<String, LogicError> {
        match self.alphabet.index(name) {
            Some(_) => Ok(name.to_string()),
            None => Err(LogicError::UnknownSymbol(name.to_string())),
        }
    }

    // ---- LTL ----

    fn ltl_or(&mut self) -> Result<Arc<Ltl>, LogicError> {
        let mut lhs = self.ltl_and()?;
        while self.peek() == Some(&Tok::Bar) {
            self.i += 1;
            lhs = Ltl::or(lhs, self.ltl_and()?);
        }
        Ok(lhs)
    }

    fn ltl_and(&mut self) -> Result<Arc<Ltl>, LogicError> {
        let mut lhs = self.ltl_temporal()?;
        while self.peek() == Some(&Tok::Amp) {
            self.i += 1;
            lhs = Ltl::and(lhs, self.ltl_temporal()?);
        }
        Ok(lhs)
    }

    fn ltl_temporal(&mut self) -> Result<Arc<Ltl>, LogicError> {
        let lhs = self.ltl_unary()?;
        let since = if self.is_kw("S") {
            true
        } else if self.is_kw("U") {
            false
        } else {
            return Ok(lhs);
        };
        self.i += 1;
        let rhs = self.ltl_unary()?;
        if self.is_kw("S") || self.is_kw("U") {
            return self.err("S and U are non-associative; add parentheses");
        }
        Ok(if since { Ltl::since(lhs, rhs) } else { Ltl::until(lhs, rhs) })
    }

    fn ltl_unary(&mut self) -> Result<Arc<Ltl>, LogicError> {
        if self.peek() == Some(&Tok::Bang) {
            self.i += 1;
            return Ok(Ltl::not(self.ltl_unary()?));
        }
        if self.is_kw("P") {
            self.i += 1;
            return Ok(Ltl::past(self.ltl_unary()?));
        }
        if self.is_kw("F") {
            self.i += 1;
            return Ok(Ltl::future(self.ltl_unary()?));
        }
        self.ltl_primary()
    }

    fn ltl_primary(&mut self) -> Result<Arc<Ltl>, LogicError> {
        match self.bump() {
            Some(Tok::LParen) => {
                let f = self.ltl_or()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "true" => Ok(Ltl::tt()),
                "false" => Ok(Ltl::ff()),
                "S" | "U" | "E" => {
                    self.i -= 1;
                    self.err(format!("unexpected keyword '{s}'"))
                }
                _ => Ok(Ltl::atom(self.symbol(&s)?)),
            },
            Some(_) => {
                self.i -= 1;
                self.err("expected a formula")
            }
            None => self.err("unexpected end of input"),
        }
    }

    // ---- PFO ----

    fn var(&mut self) -> Result<Var, LogicError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "x" => {
                self.i += 1;
                Ok(Var::X)
            }
            Some(Tok::Ident(s)) if s == "y" => {
                self.i += 1;
                Ok(Var::Y)
            }
            _ => self.err("expected variable x or y"),
        }
    }

    fn pfo_or(&mut self) -> Result<Pfo, LogicError> {
        let mut lhs = self.pfo_and()?;
        while self.peek() == Some(&Tok::Bar) {
            self.i += 1;
            lhs = Pfo::or(lhs, self.pfo_and()?);
        }
        Ok(lhs)
    }

    fn pfo_and(&mut self) -> Result<Pfo, LogicError> {
        let mut lhs = self.pfo_unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.i += 1;
            lhs = Pfo::and(lhs, self.pfo_unary()?);
        }
        Ok(lhs)
    }

    fn pfo_unary(&mut self) -> Result<Pfo, LogicError> {
        if self.peek() == Some(&Tok::Bang) {
            self.i += 1;
            return Ok(Pfo::not(self.pfo_unary()?));
        }
        if self.is_kw("E") && self.peek2() != Some(&Tok::LParen) {
            self.i += 1;
            let v = self.var()?;
            let bound = if self.peek() == Some(&Tok::Lt) {
                self.i += 1;
                Some(self.var()?)
            } else {
                None
            };
            self.expect(Tok::Dot, "'.' after quantifier")?;
            let body = self.pfo_or()?;
            return Ok(match bound {
                Some(b) => Pfo::exists_less(v, b, body),
                None => Pfo::exists(v, body),
            });
        }
        self.pfo_primary()
    }

    fn pfo_primary(&mut self) -> Result<Pfo, LogicError> {
        match self.bump() {
            Some(Tok::LParen) => {
                let f = self.pfo_or()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::Ident(s)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.i += 1;
                    let v = self.var()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Pfo::atom(self.symbol(&s)?, v))
                } else if (s == "x" || s == "y") && self.peek() == Some(&Tok::Lt) {
                    let a = if s == "x" { Var::X } else { Var::Y };
                    self.i += 1;
                    let b = self.var()?;
                    Ok(Pfo::Less(a, b))
                } else {
                    self.i -= 1;
                    self.err("expected sym(var), var < var, or a quantifier")
                }
            }
            Some(_) => {
                self.i -= 1;
                self.err("expected a formula")
            }
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses LTL text, rejecting atoms outside `alphabet`.
pub fn parse_ltl(text: &str, alphabet: &Alphabet) -> Result<Arc<Ltl>, LogicError> {
    let mut p = Parser::new(text, alphabet)?;
    let f = p.ltl_or()?;
    p.finish()?;
    Ok(f)
}

/// Parses PFO text, rejecting atoms outside `alphabet`.
pub fn parse_pfo(text: &str, alphabet: &Alphabet) -> Result<Pfo, LogicError> {
    let mut p = Parser::new(text, alphabet)?;
    let f = p.pfo_or()?;
    p.finish()?;
    Ok(f)
}
