//! Predicate graph to LTL by recursive expression translation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::frontend::Mention;
use crate::ir::{PredicateGraph, UnaryPred};
use crate::ltl::{Atom, CmpOp, Ltl, Operand, Value, VarRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    /// Logical: implication, record access, connectives.
    L,
    /// Simple expressions: set/equal/initialize/comparison.
    M,
    /// Unique terms.
    U,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emission {
    pub node: Mention,
    pub level: Level,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub formula: Ltl,
    pub warnings: Vec<String>,
    pub trace: Vec<Emission>,
}

#[derive(Debug, Clone, Default)]
pub struct TranslateOptions {
    /// Known variable names: flat `Owner_Attr` names and variable-valued
    /// right-hand sides are resolved against this set.
    pub declared: BTreeSet<String>,
    pub arith_decode: BTreeMap<String, String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Conn {
    And,
    Or,
}

fn combine(conn: Conn, parts: Vec<Ltl>) -> Ltl {
    match conn {
        Conn::And => Ltl::and(parts),
        Conn::Or => Ltl::or(parts),
    }
}

struct Translator<'a> {
    g: &'a PredicateGraph,
    opts: &'a TranslateOptions,
    warnings: Vec<String>,
    trace: Vec<Emission>,
}

fn strip_attribute(attr: &str) -> &str {
    for suffix in ["_attribute", "_Attribute", "_ATTRIBUTE"] {
        if let Some(s) = attr.strip_suffix(suffix) {
            if !s.is_empty() {
                return s;
            }
        }
    }
    attr
}

fn bool_word(w: &str) -> Option<bool> {
    match w.to_ascii_lowercase().as_str() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

impl<'a> Translator<'a> {
    fn emit(&mut self, pos: usize, level: Level, rule: &str) {
        self.trace.push(Emission { node: self.g.node(pos).mention.clone(), level, rule: rule.to_string() });
    }

    fn lemma(&self, pos: usize) -> &str {
        &self.g.node(pos).mention.lemma
    }

    /// Owners reachable from `start` through one coordination chain, with the
    /// connective joining them.
    fn chain(&self, start: usize) -> Vec<(Option<Conn>, usize)> {
        let mut seq = vec![(None, start)];
        let mut cur = start;
        let mut seen = BTreeSet::from([start]);
        loop {
            let next = self
                .g
                .out(cur, "and")
                .first()
                .map(|n| (Conn::And, *n))
                .or_else(|| self.g.out(cur, "or").first().map(|n| (Conn::Or, *n)));
            match next {
                Some((c, n)) if seen.insert(n) => {
                    seq.push((Some(c), n));
                    cur = n;
                }
                _ => return seq,
            }
        }
    }

    /// Variable paths named by a noun node, distributing over coordinated owners.
    fn var_terms(&mut self, pos: usize) -> (Conn, Vec<VarRef>) {
        let owners = self.g.out(pos, "of");
        if owners.is_empty() {
            self.emit(pos, Level::U, "unique");
            return (Conn::And, vec![VarRef::new(self.lemma(pos))]);
        }
        self.emit(pos, Level::L, "of");
        let attr = self.lemma(pos).to_string();
        let first_chain = self.chain(owners[0]);
        let conn = first_chain.iter().find_map(|(c, _)| *c).unwrap_or(Conn::And);
        let mut ordered: Vec<usize> = first_chain.iter().map(|(_, n)| *n).filter(|n| owners.contains(n)).collect();
        for o in &owners {
            if !ordered.contains(o) {
                ordered.push(*o);
            }
        }
        let mut refs = Vec::new();
        for o in ordered {
            let (_, owner_refs) = self.var_terms(o);
            let owner = owner_refs.into_iter().next().expect("at least one path");
            let flat = format!("{}_{}", owner.to_string().replace('.', "_"), strip_attribute(&attr));
            if self.opts.declared.contains(&flat) {
                refs.push(VarRef::new(flat));
            } else {
                refs.push(VarRef::field(&owner, &attr));
            }
        }
        self.emit(pos, Level::U, "unique");
        (conn, refs)
    }

    fn value(&mut self, pos: usize, prefer_var: bool) -> Operand {
        if !self.g.out(pos, "of").is_empty() {
            let (_, refs) = self.var_terms(pos);
            return Operand::Var(refs.into_iter().next().unwrap());
        }
        self.emit(pos, Level::U, "unique");
        let w = self.lemma(pos).to_string();
        if self.opts.declared.contains(&w) || prefer_var && !crate::ir::is_numeric_word(&w) {
            return Operand::Var(VarRef::new(w));
        }
        if let Some(b) = bool_word(&w) {
            return Operand::Value(Value::Bool(b));
        }
        if let Ok(i) = w.parse::<i64>() {
            return Operand::Value(Value::Int(i));
        }
        if let Some(text) = self.opts.arith_decode.get(&w) {
            return Operand::Value(Value::Arith(text.clone()));
        }
        Operand::Value(Value::Named(w))
    }

    /// tr^m for an action node.
    fn simple(&mut self, pos: usize) -> Option<Ltl> {
        let node = self.g.node(pos).clone();
        let Some(action) = node.action() else {
            self.warnings.push(format!("untranslatable node {}: no predicate", node.mention));
            return None;
        };
        let (a1, a2) = (self.g.out(pos, "arg1"), self.g.out(pos, "arg2"));
        let (Some(&a1), Some(&a2)) = (a1.first(), a2.first()) else {
            self.warnings.push(format!("untranslatable node {}: missing argument", node.mention));
            return None;
        };
        if node.negated {
            self.emit(pos, Level::L, "neg");
        }
        self.emit(pos, Level::M, &action.name());
        let op = match action {
            UnaryPred::NumericCmp(op) => op,
            _ => CmpOp::Eq,
        };
        let (conn, lhs) = self.var_terms(a1);
        let rhs = self.value(a2, op.is_ordering());
        let atoms: Vec<Ltl> = lhs.into_iter().map(|v| Ltl::atom(Atom { lhs: v, op, rhs: rhs.clone() })).collect();
        let mut f = combine(conn, atoms);
        if node.negated {
            f = Ltl::not(f);
        }
        Some(f)
    }

    /// A clause group joined by and/or, where `and` binds tighter.
    fn group(&mut self, start: usize) -> Option<Ltl> {
        let seq = self.chain(start);
        let mut disjuncts: Vec<Vec<Ltl>> = vec![Vec::new()];
        for (conn, pos) in seq {
            if let Some(c) = conn {
                self.emit(pos, Level::L, if c == Conn::And { "and" } else { "or" });
                if c == Conn::Or {
                    disjuncts.push(Vec::new());
                }
            }
            if let Some(f) = self.simple(pos) {
                disjuncts.last_mut().unwrap().push(f);
            }
        }
        let parts: Vec<Ltl> = disjuncts.into_iter().filter(|d| !d.is_empty()).map(Ltl::and).collect();
        (!parts.is_empty()).then(|| Ltl::or(parts))
    }

    fn translate(&mut self) -> Option<Ltl> {
        let root = self.g.root.position;
        let node = self.g.node(root).clone();
        let cond_start = self.g.out(root, "impliedBy").first().copied();
        if cond_start.is_some() {
            self.emit(root, Level::L, "impliedBy");
        }
        let mut cons = self.group(root)?;
        match node.temporal.as_deref() {
            Some("eventually") => cons = Ltl::finally(cons),
            Some("never") => cons = Ltl::not(cons),
            _ => {}
        }
        let body = match cond_start {
            Some(c) => {
                let cond = self.group(c)?;
                let assigned: BTreeSet<String> = cons.atoms().iter().map(|a| a.lhs.to_string()).collect();
                let reads: BTreeSet<String> = cond.atoms().iter().flat_map(|a| a.vars()).map(|v| v.to_string()).collect();
                if node.action() == Some(UnaryPred::Set) && node.modal && !assigned.is_disjoint(&reads) {
                    cons = Ltl::next(cons);
                }
                Ltl::implies(cond, cons)
            }
            None => cons,
        };
        Some(if node.action() == Some(UnaryPred::Initialize) { body } else { Ltl::globally(body) })
    }
}

/// Translates with no declared variables: every `of` becomes a record access.
pub fn translate(graph: &PredicateGraph) -> Translation {
    translate_with(graph, &TranslateOptions::default())
}

pub fn translate_with(graph: &PredicateGraph, opts: &TranslateOptions) -> Translation {
    let mut t = Translator { g: graph, opts, warnings: Vec::new(), trace: Vec::new() };
    let formula = t.translate().unwrap_or_else(|| {
        t.warnings.push(format!("root {} produced no formula", graph.root));
        Ltl::True
    });
    for m in report_disconnected(graph) {
        t.warnings.push(format!("disconnected node {m}"));
    }
    Translation { formula, warnings: t.warnings, trace: t.trace }
}

/// Nodes not reachable from the root, in position order.
pub fn report_disconnected(graph: &PredicateGraph) -> Vec<Mention> {
    if graph.nodes.is_empty() {
        return Vec::new();
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![graph.root.position];
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            stack.extend(graph.successors(n));
        }
    }
    graph.nodes.iter().filter(|(p, _)| !seen.contains(p)).map(|(_, n)| n.mention.clone()).collect()
}
