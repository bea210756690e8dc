//! Recursive-descent parser accepting both the surface syntax
//! (`G`, `=>`, `AND`, `OR`, `NOT`) and the compact one (`->`, `&`, `|`, `!`).
//!
//! Precedence, loosest first: implication (right-assoc), `OR`, `AND`,
//! unary (`NOT`, `G`, `F`, `X`), comparison atoms.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Atom, CmpOp, Ltl, Operand, Value, VarRef};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse formula at offset {offset}: {message}")]
pub struct ParseLtlError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Arith(String),
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Cmp(CmpOp),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseLtlError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let err = |offset: usize, message: &str| ParseLtlError { offset, message: message.into() };
    while i < chars.len() {
        let (off, c) = chars[i];
        let peek = chars.get(i + 1).map(|&(_, c)| c);
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((off, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((off, Tok::RParen));
                i += 1;
            }
            '!' | '¬' | '~' => {
                out.push((off, Tok::Not));
                i += 1;
            }
            '&' | '∧' => {
                out.push((off, Tok::And));
                i += if peek == Some('&') { 2 } else { 1 };
            }
            '|' | '∨' => {
                out.push((off, Tok::Or));
                i += if peek == Some('|') { 2 } else { 1 };
            }
            '→' => {
                out.push((off, Tok::Implies));
                i += 1;
            }
            '-' if peek == Some('>') => {
                out.push((off, Tok::Implies));
                i += 2;
            }
            '=' if peek == Some('>') => {
                out.push((off, Tok::Implies));
                i += 2;
            }
            '=' => {
                out.push((off, Tok::Cmp(CmpOp::Eq)));
                i += if peek == Some('=') { 2 } else { 1 };
            }
            '<' if peek == Some('=') => {
                out.push((off, Tok::Cmp(CmpOp::Le)));
                i += 2;
            }
            '>' if peek == Some('=') => {
                out.push((off, Tok::Cmp(CmpOp::Ge)));
                i += 2;
            }
            '<' | '≤' | '≥' | '>' => {
                let op = match c {
                    '<' => CmpOp::Lt,
                    '>' => CmpOp::Gt,
                    '≤' => CmpOp::Le,
                    _ => CmpOp::Ge,
                };
                out.push((off, Tok::Cmp(op)));
                i += 1;
            }
            '[' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].1 != ']' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(err(off, "unterminated arithmetic bracket"));
                }
                let inner: String = chars[start..j].iter().map(|&(_, c)| c).collect();
                out.push((off, Tok::Arith(inner.trim().to_string())));
                i = j + 1;
            }
            c if c.is_ascii_digit() || (c == '-' && peek.is_some_and(|p| p.is_ascii_digit())) => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                let n = s.parse().map_err(|_| err(off, "integer out of range"))?;
                out.push((off, Tok::Int(n)));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_alphanumeric() || matches!(chars[i].1, '_' | '.' | '\'')) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                let tok = match word.as_str() {
                    "AND" | "and" => Tok::And,
                    "OR" | "or" => Tok::Or,
                    "NOT" | "not" => Tok::Not,
                    _ => Tok::Ident(word),
                };
                out.push((off, tok));
            }
            _ => return Err(err(off, &format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: &'a BTreeSet<String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseLtlError> {
        Err(ParseLtlError { offset: self.offset(), message: message.into() })
    }

    fn implication(&mut self) -> Result<Ltl, ParseLtlError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Ltl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Ltl, ParseLtlError> {
        let mut kids = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            kids.push(self.conjunction()?);
        }
        Ok(if kids.len() == 1 { kids.pop().unwrap() } else { Ltl::Or(kids) })
    }

    fn conjunction(&mut self) -> Result<Ltl, ParseLtlError> {
        let mut kids = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            kids.push(self.unary()?);
        }
        Ok(if kids.len() == 1 { kids.pop().unwrap() } else { Ltl::And(kids) })
    }

    fn unary(&mut self) -> Result<Ltl, ParseLtlError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Ltl::not(self.unary()?))
            }
            Some(Tok::Ident(w)) if matches!(w.as_str(), "G" | "F" | "X") && self.is_operator_use() => {
                let op = w.clone();
                self.pos += 1;
                let inner = self.unary()?;
                Ok(match op.as_str() {
                    "G" => Ltl::globally(inner),
                    "F" => Ltl::finally(inner),
                    _ => Ltl::next(inner),
                })
            }
            _ => self.primary(),
        }
    }

    /// `G`, `F` and `X` are operators unless used as an atom name
    /// (followed by a comparison, a binary connective or the end).
    fn is_operator_use(&self) -> bool {
        matches!(
            self.toks.get(self.pos + 1).map(|(_, t)| t),
            Some(Tok::LParen | Tok::Not | Tok::Ident(_))
        )
    }

    fn primary(&mut self) -> Result<Ltl, ParseLtlError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(f)
            }
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                match w.as_str() {
                    "true" | "TRUE" | "True" => return Ok(Ltl::True),
                    "false" | "FALSE" | "False" => return Ok(Ltl::False),
                    _ => {}
                }
                if let Some(Tok::Cmp(op)) = self.peek().cloned() {
                    self.pos += 1;
                    let rhs = self.operand()?;
                    return Ok(Ltl::Atom(Atom { lhs: VarRef::dotted(&w), op, rhs }));
                }
                Ok(Ltl::Prop(w))
            }
            Some(_) => self.err("expected an atom or '('"),
            None => self.err("unexpected end of formula"),
        }
    }

    fn operand(&mut self) -> Result<Operand, ParseLtlError> {
        let tok = self.peek().cloned();
        self.pos += 1;
        Ok(match tok {
            Some(Tok::Int(n)) => Operand::Value(Value::Int(n)),
            Some(Tok::Arith(s)) => Operand::Value(Value::Arith(s)),
            Some(Tok::Ident(w)) => match w.as_str() {
                "true" | "TRUE" | "True" => Operand::Value(Value::Bool(true)),
                "false" | "FALSE" | "False" => Operand::Value(Value::Bool(false)),
                _ if self.vars.contains(&w) || self.vars.contains(w.split('.').next().unwrap()) && w.contains('.') => {
                    Operand::Var(VarRef::dotted(&w))
                }
                _ => Operand::Value(Value::Named(w)),
            },
            _ => {
                self.pos -= 1;
                return self.err("expected a value or variable");
            }
        })
    }
}

/// Parses a formula; identifiers on the right of a comparison are values.
pub fn parse(text: &str) -> Result<Ltl, ParseLtlError> {
    parse_with_vars(text, &BTreeSet::new())
}

/// Parses a formula, resolving right-hand identifiers in `vars` as variables.
pub fn parse_with_vars(text: &str, vars: &BTreeSet<String>) -> Result<Ltl, ParseLtlError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), vars };
    let f = p.implication()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}
