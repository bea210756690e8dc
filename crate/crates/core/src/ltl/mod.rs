//! Typed linear temporal logic formulas.
//!
//! Atoms compare a variable reference against a value or another variable
//! (`Regulator_Mode = INIT`, `Current_Temperature < Lower_Desired_Temperature`).
//! Purely propositional atoms (`Prop`) appear after bit encoding and in
//! hand-written assumptions.

mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parse::{parse, parse_with_vars, ParseLtlError};
pub use print::Style;

/// A variable, optionally with a record field path (`Lower_Desired_Temperature.Status_attribute`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarRef {
    pub path: Vec<String>,
}

impl VarRef {
    pub fn new(name: impl Into<String>) -> Self {
        VarRef { path: vec![name.into()] }
    }

    pub fn field(base: &VarRef, field: impl Into<String>) -> Self {
        let mut path = base.path.clone();
        path.push(field.into());
        VarRef { path }
    }

    /// Parses a dotted path.
    pub fn dotted(text: &str) -> Self {
        VarRef { path: text.split('.').map(str::to_string).collect() }
    }

    pub fn root(&self) -> &str {
        &self.path[0]
    }

    pub fn is_record_access(&self) -> bool {
        self.path.len() > 1
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.path.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Named(String),
    /// Decoded arithmetic expression text, e.g. `x + 5`.
    Arith(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Named(s) => f.write_str(s),
            Value::Arith(s) => write!(f, "[{s}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operand {
    Var(VarRef),
    Value(Value),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => v.fmt(f),
            Operand::Value(v) => v.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            CmpOp::Eq => "EQ",
            CmpOp::Lt => "LT",
            CmpOp::Gt => "GT",
            CmpOp::Le => "LE",
            CmpOp::Ge => "GE",
        }
    }

    pub fn is_ordering(self) -> bool {
        self != CmpOp::Eq
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub lhs: VarRef,
    pub op: CmpOp,
    pub rhs: Operand,
}

impl Atom {
    pub fn eq_value(lhs: VarRef, value: Value) -> Self {
        Atom { lhs, op: CmpOp::Eq, rhs: Operand::Value(value) }
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarRef> {
        std::iter::once(&self.lhs).chain(match &self.rhs {
            Operand::Var(v) => Some(v),
            Operand::Value(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// An LTL formula. `And`/`Or` built through [`Ltl::and`]/[`Ltl::or`] always
/// have at least two children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ltl {
    True,
    False,
    Prop(String),
    Atom(Atom),
    Not(Box<Ltl>),
    And(Vec<Ltl>),
    Or(Vec<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Globally(Box<Ltl>),
    Finally(Box<Ltl>),
}

impl Ltl {
    pub fn prop(name: impl Into<String>) -> Ltl {
        Ltl::Prop(name.into())
    }

    pub fn atom(atom: Atom) -> Ltl {
        Ltl::Atom(atom)
    }

    pub fn not(f: Ltl) -> Ltl {
        Ltl::Not(Box::new(f))
    }

    pub fn implies(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Ltl) -> Ltl {
        Ltl::Next(Box::new(f))
    }

    pub fn globally(f: Ltl) -> Ltl {
        Ltl::Globally(Box::new(f))
    }

    pub fn finally(f: Ltl) -> Ltl {
        Ltl::Finally(Box::new(f))
    }

    /// Conjunction; flattens nested conjunctions and collapses the
    /// degenerate zero/one-child cases.
    pub fn and(children: Vec<Ltl>) -> Ltl {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Ltl::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Ltl::True,
            1 => flat.pop().unwrap(),
            _ => Ltl::And(flat),
        }
    }

    pub fn or(children: Vec<Ltl>) -> Ltl {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Ltl::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Ltl::False,
            1 => flat.pop().unwrap(),
            _ => Ltl::Or(flat),
        }
    }

    pub fn children(&self) -> Vec<&Ltl> {
        match self {
            Ltl::True | Ltl::False | Ltl::Prop(_) | Ltl::Atom(_) => vec![],
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Globally(f) | Ltl::Finally(f) => vec![f],
            Ltl::And(cs) | Ltl::Or(cs) => cs.iter().collect(),
            Ltl::Implies(a, b) => vec![a, b],
        }
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, Ltl::Next(_) | Ltl::Globally(_) | Ltl::Finally(_))
            || self.children().into_iter().any(Ltl::is_temporal)
    }

    pub fn contains_next(&self) -> bool {
        matches!(self, Ltl::Next(_)) || self.children().into_iter().any(Ltl::contains_next)
    }

    /// Number of AST nodes.
    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(Ltl::node_count).sum::<usize>()
    }

    /// Every subtree (including `self`), pre-order, duplicates kept.
    pub fn subtrees(&self) -> Vec<&Ltl> {
        let mut out = vec![self];
        for c in self.children() {
            out.extend(c.subtrees());
        }
        out
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        self.subtrees()
            .into_iter()
            .filter_map(|f| match f {
                Ltl::Atom(a) => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn props(&self) -> BTreeSet<String> {
        self.subtrees()
            .into_iter()
            .filter_map(|f| match f {
                Ltl::Prop(p) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }

    /// Variables referenced by typed atoms and propositions (propositions
    /// count as boolean variables).
    pub fn vars(&self) -> BTreeSet<VarRef> {
        let mut out = BTreeSet::new();
        for f in self.subtrees() {
            match f {
                Ltl::Atom(a) => out.extend(a.vars().cloned()),
                Ltl::Prop(p) => {
                    out.insert(VarRef::dotted(p));
                }
                _ => {}
            }
        }
        out
    }

    /// Rewrites every atom/proposition leaf.
    pub fn map_leaves(&self, f: &mut impl FnMut(&Ltl) -> Ltl) -> Ltl {
        match self {
            Ltl::Prop(_) | Ltl::Atom(_) => f(self),
            Ltl::True | Ltl::False => self.clone(),
            Ltl::Not(a) => Ltl::not(a.map_leaves(f)),
            Ltl::Next(a) => Ltl::next(a.map_leaves(f)),
            Ltl::Globally(a) => Ltl::globally(a.map_leaves(f)),
            Ltl::Finally(a) => Ltl::finally(a.map_leaves(f)),
            Ltl::And(cs) => Ltl::and(cs.iter().map(|c| c.map_leaves(f)).collect()),
            Ltl::Or(cs) => Ltl::or(cs.iter().map(|c| c.map_leaves(f)).collect()),
            Ltl::Implies(a, b) => Ltl::implies(a.map_leaves(f), b.map_leaves(f)),
        }
    }

    /// Canonical form used for syntactic comparison: nested And/Or are
    /// flattened, double negations dropped, `x = TRUE` on a proposition-like
    /// comparison left alone, and And/Or children sorted by printed text.
    pub fn normalize(&self) -> Ltl {
        match self {
            Ltl::Not(inner) => match inner.normalize() {
                Ltl::Not(x) => *x,
                other => Ltl::not(other),
            },
            Ltl::And(cs) => {
                let mut kids: Vec<Ltl> = cs.iter().map(Ltl::normalize).collect();
                kids = match Ltl::and(kids) {
                    Ltl::And(k) => k,
                    single => return single,
                };
                kids.sort_by_cached_key(|k| k.to_string());
                kids.dedup();
                Ltl::and(kids)
            }
            Ltl::Or(cs) => {
                let mut kids: Vec<Ltl> = cs.iter().map(Ltl::normalize).collect();
                kids = match Ltl::or(kids) {
                    Ltl::Or(k) => k,
                    single => return single,
                };
                kids.sort_by_cached_key(|k| k.to_string());
                kids.dedup();
                Ltl::or(kids)
            }
            Ltl::Implies(a, b) => Ltl::implies(a.normalize(), b.normalize()),
            Ltl::Next(a) => Ltl::next(a.normalize()),
            Ltl::Globally(a) => Ltl::globally(a.normalize()),
            Ltl::Finally(a) => Ltl::finally(a.normalize()),
            other => other.clone(),
        }
    }

    pub fn equivalent_syntax(&self, other: &Ltl) -> bool {
        self.normalize() == other.normalize()
    }

    pub fn to_styled(&self, style: Style) -> String {
        print::render(self, style)
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(self, Style::Surface))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(v: &str, val: &str) -> Ltl {
        Ltl::atom(Atom::eq_value(VarRef::new(v), Value::Named(val.into())))
    }

    #[test]
    fn and_flattens_and_collapses() {
        assert_eq!(Ltl::and(vec![]), Ltl::True);
        assert_eq!(Ltl::and(vec![Ltl::prop("p")]), Ltl::prop("p"));
        let f = Ltl::and(vec![Ltl::and(vec![Ltl::prop("p"), Ltl::prop("q")]), Ltl::prop("r")]);
        assert_eq!(f, Ltl::And(vec![Ltl::prop("p"), Ltl::prop("q"), Ltl::prop("r")]));
    }

    #[test]
    fn normalize_sorts_and_drops_double_negation() {
        let f = Ltl::and(vec![a("Y", "B"), Ltl::not(Ltl::not(a("X", "A")))]);
        let g = Ltl::and(vec![a("X", "A"), a("Y", "B")]);
        assert!(f.equivalent_syntax(&g));
    }

    #[test]
    fn node_count_counts_atoms() {
        let f = Ltl::globally(Ltl::implies(Ltl::prop("p"), Ltl::prop("q")));
        assert_eq!(f.node_count(), 4);
        assert_eq!(f.subtrees().len(), 4);
    }

    #[test]
    fn varref_display_uses_dots() {
        let v = VarRef::field(&VarRef::new("Lower_Desired_Temperature"), "Status_attribute");
        assert_eq!(v.to_string(), "Lower_Desired_Temperature.Status_attribute");
        assert_eq!(VarRef::dotted("a.b"), VarRef { path: vec!["a".into(), "b".into()] });
    }
}
