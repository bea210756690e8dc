use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::frontend::{comparator_op, Mention};
use crate::ltl::CmpOp;

use super::{IRTable, IrError, Quantifier, TermType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UnaryPred {
    Unique,
    Set,
    Equal,
    Initialize,
    NumericCmp(CmpOp),
}

impl UnaryPred {
    pub fn is_action(&self) -> bool {
        !matches!(self, UnaryPred::Unique)
    }

    pub fn name(&self) -> String {
        match self {
            UnaryPred::Unique => "unique".into(),
            UnaryPred::Set => "set".into(),
            UnaryPred::Equal => "equal".into(),
            UnaryPred::Initialize => "initialize".into(),
            UnaryPred::NumericCmp(op) => format!("numeric-cmp({})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub mention: Mention,
    pub preds: BTreeSet<UnaryPred>,
    pub term_type: TermType,
    pub negated: bool,
    pub temporal: Option<String>,
    pub modal: bool,
}

impl GraphNode {
    pub fn action(&self) -> Option<UnaryPred> {
        self.preds.iter().copied().find(UnaryPred::is_action)
    }

    pub fn is_unique(&self) -> bool {
        self.preds.contains(&UnaryPred::Unique)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateGraph {
    /// Keyed by mention position.
    pub nodes: BTreeMap<usize, GraphNode>,
    /// `(label, from, to)` by position, sorted.
    pub edges: BTreeSet<(String, usize, usize)>,
    pub root: Mention,
}

impl PredicateGraph {
    pub fn node(&self, pos: usize) -> &GraphNode {
        &self.nodes[&pos]
    }

    pub fn out(&self, from: usize, label: &str) -> Vec<usize> {
        let mut targets: Vec<usize> =
            self.edges.iter().filter(|(l, f, _)| l == label && *f == from).map(|(_, _, t)| *t).collect();
        targets.sort_unstable();
        targets
    }

    pub fn incoming(&self, to: usize, label: &str) -> Vec<usize> {
        self.edges.iter().filter(|(l, _, t)| l == label && *t == to).map(|(_, f, _)| *f).collect()
    }

    pub fn successors(&self, from: usize) -> Vec<usize> {
        self.edges.iter().filter(|(_, f, _)| *f == from).map(|(_, _, t)| *t).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph predicates {\n");
        for n in self.nodes.values() {
            let preds: Vec<String> = n.preds.iter().map(UnaryPred::name).collect();
            let shape = if n.is_unique() { "box" } else { "ellipse" };
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\\n{}\", shape={shape}];",
                n.mention.position,
                n.mention,
                preds.join(",")
            );
        }
        for (label, f, t) in &self.edges {
            let _ = writeln!(out, "  n{f} -> n{t} [label=\"{label}\"];");
        }
        out.push_str("}\n");
        out
    }
}

fn action_pred(lemma: &str, term_type: TermType) -> Option<UnaryPred> {
    if let Some(op) = comparator_op(lemma) {
        return Some(UnaryPred::NumericCmp(op));
    }
    match lemma.to_ascii_lowercase().as_str() {
        "set" => Some(UnaryPred::Set),
        "initialize" => Some(UnaryPred::Initialize),
        "equals" | "equal" => Some(UnaryPred::Equal),
        "is" if term_type == TermType::Event => Some(UnaryPred::Equal),
        _ => None,
    }
}

/// Drops function words, maps indicative verbs to predicates, turns argument
/// relations into `arg1`/`arg2` edges and picks the root.
pub fn build_predicate_graph(ir: &IRTable) -> Result<PredicateGraph, IrError> {
    let mut nodes = BTreeMap::new();
    for (pos, e) in &ir.entries {
        if e.has_tag("function") {
            continue;
        }
        let mut preds = BTreeSet::new();
        if e.quantifier == Quantifier::Unique {
            preds.insert(UnaryPred::Unique);
        }
        if let Some(p) = action_pred(&e.mention.lemma, e.term_type) {
            preds.insert(p);
        }
        nodes.insert(
            *pos,
            GraphNode {
                mention: e.mention.clone(),
                preds,
                term_type: e.term_type,
                negated: e.negated,
                temporal: e.temporal.clone(),
                modal: e.has_tag("modal"),
            },
        );
    }
    let mut edges = BTreeSet::new();
    let mut add = |label: &str, from: usize, to: &Mention| {
        if nodes.contains_key(&to.position) {
            edges.insert((label.to_string(), from, to.position));
        }
    };
    for (pos, e) in &ir.entries {
        if !nodes.contains_key(pos) {
            continue;
        }
        let agent = e.rel("agent").first();
        let object = e.rel("object").first();
        let to = e.rel("to").first();
        match agent {
            Some(a) => {
                add("arg1", *pos, a);
                if let Some(o) = object {
                    add("arg2", *pos, o);
                }
                if let Some(t) = to {
                    add("to", *pos, t);
                }
            }
            None => {
                if let Some(o) = object {
                    add("arg1", *pos, o);
                }
                if let Some(t) = to {
                    add("arg2", *pos, t);
                }
            }
        }
        for label in ["of", "impliedBy", "and", "or"] {
            for t in e.rel(label) {
                add(label, *pos, t);
            }
        }
    }
    let dependent: BTreeSet<usize> = edges
        .iter()
        .filter(|(l, _, _)| matches!(l.as_str(), "impliedBy" | "and" | "or"))
        .map(|(_, _, t)| *t)
        .collect();
    let candidates: Vec<&GraphNode> =
        nodes.values().filter(|n| n.action().is_some() && !dependent.contains(&n.mention.position)).collect();
    let root = match candidates.as_slice() {
        [] => return Err(IrError::Structure("no predicate node can serve as root".into())),
        [one] => one.mention.clone(),
        many => {
            let modal: Vec<&&GraphNode> = many.iter().filter(|n| n.modal).collect();
            match modal.as_slice() {
                [one] => one.mention.clone(),
                [] => many.last().unwrap().mention.clone(),
                several => {
                    let names: Vec<String> = several.iter().map(|n| n.mention.to_string()).collect();
                    return Err(IrError::Structure(format!("multiple roots: {}", names.join(", "))));
                }
            }
        }
    };
    Ok(PredicateGraph { nodes, edges, root })
}
