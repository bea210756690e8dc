//! IR table construction from typed dependencies and the predicate graph.

mod graph;
mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{comparator_op, Mention, TypedDependency};

pub use graph::{build_predicate_graph, GraphNode, PredicateGraph, UnaryPred};
pub use rules::{apply_type_rules, default_rules, parse_rules, Action, Guard, Pattern, Term, TypeRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error("rule file line {line}: {message}")]
    Rule { line: usize, message: String },
    #[error("conflicting {relation} for {entry}: {existing} from `{first_rule}` vs {new} from `{second_rule}`")]
    Conflict {
        entry: Mention,
        relation: String,
        existing: Mention,
        new: Mention,
        first_rule: String,
        second_rule: String,
    },
    #[error("structure error: {0}")]
    Structure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermType {
    Entity,
    Event,
    Numeric,
    Predicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Unique,
    All,
    Exists,
    None,
}

/// Relations holding at most one target.
pub const SINGLE_VALUED: &[&str] = &["agent", "object", "to", "impliedBy"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IREntry {
    pub mention: Mention,
    pub term_type: TermType,
    pub negated: bool,
    pub quantifier: Quantifier,
    pub relations: BTreeMap<String, Vec<Mention>>,
    pub temporal: Option<String>,
    /// Free-form metadata such as `modal` or `function`.
    pub tags: BTreeSet<String>,
}

impl IREntry {
    fn new(mention: Mention, term_type: TermType) -> Self {
        IREntry {
            mention,
            term_type,
            negated: false,
            quantifier: Quantifier::None,
            relations: BTreeMap::new(),
            temporal: None,
            tags: BTreeSet::new(),
        }
    }

    pub fn rel(&self, name: &str) -> &[Mention] {
        self.relations.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }
}

impl fmt::Display for IREntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tt = match self.term_type {
            TermType::Entity => "entity",
            TermType::Event => "event",
            TermType::Numeric => "numeric",
            TermType::Predicate => "predicate",
        };
        write!(f, "{}: {{{tt}", self.mention)?;
        if self.negated {
            write!(f, " | negated")?;
        }
        match self.quantifier {
            Quantifier::Unique => write!(f, " | unique")?,
            Quantifier::All => write!(f, " | all")?,
            Quantifier::Exists => write!(f, " | exists")?,
            Quantifier::None => {}
        }
        if let Some(t) = &self.temporal {
            write!(f, " | temporal: {t}")?;
        }
        for t in &self.tags {
            write!(f, " | {t}")?;
        }
        for (rel, targets) in &self.relations {
            let list: Vec<String> = targets.iter().map(Mention::to_string).collect();
            write!(f, " | {rel}: [{}]", list.join(", "))?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IRTable {
    /// Keyed by mention position.
    pub entries: BTreeMap<usize, IREntry>,
    /// Dependencies no rule consumed.
    pub unmatched: Vec<TypedDependency>,
}

impl IRTable {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, m: &Mention) -> Option<&IREntry> {
        self.entries.get(&m.position).filter(|e| e.mention == *m)
    }

    pub fn by_lemma(&self, lemma: &str) -> Option<&IREntry> {
        self.entries.values().find(|e| e.mention.lemma == lemma)
    }

    /// Creates an entry for every mention, with a term type from the mention's
    /// word and its syntactic role.
    fn seed(tds: &[TypedDependency]) -> Self {
        let governs_subject: BTreeSet<&Mention> = tds
            .iter()
            .filter(|td| matches!(td.relation.as_str(), "nsubj" | "nsubjpass" | "prep_to" | "dobj"))
            .map(|td| &td.governor)
            .collect();
        let mut entries = BTreeMap::new();
        for td in tds {
            for m in [&td.governor, &td.dependent] {
                entries.entry(m.position).or_insert_with(|| {
                    let tt = if comparator_op(&m.lemma).is_some() {
                        TermType::Predicate
                    } else if is_numeric_word(&m.lemma) {
                        TermType::Numeric
                    } else if governs_subject.contains(m) {
                        TermType::Event
                    } else {
                        TermType::Entity
                    };
                    IREntry::new(m.clone(), tt)
                });
            }
        }
        IRTable { entries, unmatched: Vec::new() }
    }
}

impl fmt::Display for IRTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.entries.values() {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

pub fn is_numeric_word(word: &str) -> bool {
    word.starts_with("ARITH_") || word.parse::<f64>().is_ok()
}
