//! Formula similarity and automation scoring.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{Ltl, Operand, Value, VarRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    LogicalSymbol,
    StringToken,
    VariableToken,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormulaToken {
    pub kind: TokenKind,
    pub text: String,
}

impl FormulaToken {
    fn sym(t: &str) -> Self {
        FormulaToken { kind: TokenKind::LogicalSymbol, text: t.into() }
    }

    fn string(t: impl Into<String>) -> Self {
        FormulaToken { kind: TokenKind::StringToken, text: t.into() }
    }

    fn var(t: impl Into<String>) -> Self {
        FormulaToken { kind: TokenKind::VariableToken, text: t.into() }
    }
}

fn var_tokens(v: &VarRef, out: &mut Vec<FormulaToken>) {
    out.push(FormulaToken::var(v.root()));
    out.extend(v.path[1..].iter().map(|f| FormulaToken::string(f.clone())));
}

fn push_tokens(f: &Ltl, out: &mut Vec<FormulaToken>) {
    let infix = |op: &str, cs: &[Ltl], out: &mut Vec<FormulaToken>| {
        for (i, c) in cs.iter().enumerate() {
            if i > 0 {
                out.push(FormulaToken::sym(op));
            }
            push_tokens(c, out);
        }
    };
    match f {
        Ltl::True => out.push(FormulaToken::sym("TRUE")),
        Ltl::False => out.push(FormulaToken::sym("FALSE")),
        Ltl::Prop(p) => out.push(FormulaToken::string(p.clone())),
        Ltl::Atom(a) => {
            var_tokens(&a.lhs, out);
            out.push(FormulaToken::sym(a.op.symbol()));
            match &a.rhs {
                Operand::Var(v) => var_tokens(v, out),
                Operand::Value(Value::Bool(b)) => out.push(FormulaToken::string(if *b { "TRUE" } else { "FALSE" })),
                Operand::Value(v) => out.push(FormulaToken::string(v.to_string())),
            }
        }
        Ltl::Not(a) => {
            out.push(FormulaToken::sym("NOT"));
            push_tokens(a, out);
        }
        Ltl::Next(a) => {
            out.push(FormulaToken::sym("X"));
            push_tokens(a, out);
        }
        Ltl::Globally(a) => {
            out.push(FormulaToken::sym("G"));
            push_tokens(a, out);
        }
        Ltl::Finally(a) => {
            out.push(FormulaToken::sym("F"));
            push_tokens(a, out);
        }
        Ltl::And(cs) => infix("AND", cs, out),
        Ltl::Or(cs) => infix("OR", cs, out),
        Ltl::Implies(a, b) => {
            push_tokens(a, out);
            out.push(FormulaToken::sym("=>"));
            push_tokens(b, out);
        }
    }
}

pub fn tokenize(f: &Ltl) -> Vec<FormulaToken> {
    let mut out = Vec::new();
    push_tokens(f, &mut out);
    out
}

/// Substitution cost between two tokens, in [0, 1].
pub fn substitution_cost(a: &FormulaToken, b: &FormulaToken) -> f64 {
    match (a.kind, b.kind) {
        (TokenKind::LogicalSymbol, TokenKind::LogicalSymbol) => (a.text != b.text) as u8 as f64,
        (TokenKind::VariableToken, TokenKind::VariableToken) => 0.0,
        (TokenKind::StringToken, TokenKind::StringToken) => {
            let longest = a.text.chars().count().max(b.text.chars().count());
            if longest == 0 {
                0.0
            } else {
                strsim::levenshtein(&a.text, &b.text) as f64 / longest as f64
            }
        }
        _ => 1.0,
    }
}

pub fn typed_levenshtein(a: &[FormulaToken], b: &[FormulaToken]) -> f64 {
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64).collect();
    for (i, x) in a.iter().enumerate() {
        let mut row = vec![(i + 1) as f64];
        for (j, y) in b.iter().enumerate() {
            let best = (prev[j + 1] + 1.0).min(row[j] + 1.0).min(prev[j] + substitution_cost(x, y));
            row.push(best);
        }
        prev = row;
    }
    prev[b.len()]
}

pub fn similarity(a: &Ltl, b: &Ltl) -> f64 {
    let (ta, tb) = (tokenize(a), tokenize(b));
    let longest = ta.len().max(tb.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - typed_levenshtein(&ta, &tb) / longest as f64
}

/// Every subtree of `f`, including `f` and its atoms, in preorder.
pub fn subformulas(f: &Ltl) -> Vec<Ltl> {
    f.subtrees().into_iter().cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub generated: String,
    pub ground: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub pairs: Vec<MatchPair>,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

fn best(x: &Ltl, pool: &[Ltl]) -> (usize, f64) {
    let mut top = (0, f64::NEG_INFINITY);
    for (k, y) in pool.iter().enumerate() {
        let s = similarity(x, y);
        if s > top.1 {
            top = (k, s);
        }
    }
    top
}

/// Relaxed matching: each subformula takes its best partner, partners may repeat.
pub fn fmeasure(ground: &Ltl, generated: &Ltl) -> MatchReport {
    let g = subformulas(ground);
    let h = subformulas(generated);
    let mut pairs = Vec::with_capacity(h.len());
    let mut precision = 0.0;
    for x in &h {
        let (k, s) = best(x, &g);
        precision += s;
        pairs.push(MatchPair { generated: x.to_string(), ground: g[k].to_string(), similarity: s });
    }
    precision /= h.len() as f64;
    let recall = g.iter().map(|y| best(y, &h).1).sum::<f64>() / g.len() as f64;
    let f_measure = if precision > 0.0 && recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    MatchReport { pairs, precision, recall, f_measure }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Correct,
    Partial,
    Wrong,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("automation score of an empty result list is undefined")]
pub struct EmptyResults;

/// Percentage with half credit for partial results.
pub fn automation_score(results: &[Outcome]) -> Result<f64, EmptyResults> {
    if results.is_empty() {
        return Err(EmptyResults);
    }
    let credit: f64 = results
        .iter()
        .map(|r| match r {
            Outcome::Correct => 1.0,
            Outcome::Partial => 0.5,
            Outcome::Wrong => 0.0,
        })
        .sum();
    Ok(100.0 * credit / results.len() as f64)
}

/// Results list from tallies, in the order correct, partial, wrong.
pub fn tallies(correct: usize, partial: usize, wrong: usize) -> Vec<Outcome> {
    let mut out = vec![Outcome::Correct; correct];
    out.extend(vec![Outcome::Partial; partial]);
    out.extend(vec![Outcome::Wrong; wrong]);
    out
}
