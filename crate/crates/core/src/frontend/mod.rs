//! Sentence preprocessing and the controlled-grammar dependency parser.

mod parser;
mod preprocess;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::{parse_dependencies, DependencyParse, ParseError};
pub use preprocess::{comparator_op, preprocess, PreprocessedSentence};

/// A word occurrence: lemma plus 1-based position in the preprocessed sentence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mention {
    pub lemma: String,
    pub position: usize,
}

impl Mention {
    pub fn new(lemma: impl Into<String>, position: usize) -> Self {
        Mention { lemma: lemma.into(), position }
    }

    /// Parses `lemma-position`.
    pub fn parse(text: &str) -> Option<Mention> {
        let (lemma, pos) = text.rsplit_once('-')?;
        let position = pos.parse().ok().filter(|p| *p >= 1)?;
        (!lemma.is_empty()).then(|| Mention::new(lemma, position))
    }
}

impl fmt::Display for Mention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lemma, self.position)
    }
}

/// Relations the grammar emits, plus the collapsed prepositions that type
/// rules commonly reference.
pub const RELATIONS: &[&str] = &[
    "nsubj", "nsubjpass", "dobj", "det", "aux", "auxpass", "advmod", "advcl", "mark", "neg",
    "conj_and", "conj_or", "prep_of", "prep_to", "prep_upon", "prep_in", "prep_on", "prep_for",
    "prep_with", "prep_by", "prep_after", "prep_before", "prep_until", "cop",
];

pub fn is_relation(name: &str) -> bool {
    RELATIONS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypedDependency {
    pub relation: String,
    pub governor: Mention,
    pub dependent: Mention,
}

impl TypedDependency {
    pub fn new(relation: impl Into<String>, governor: Mention, dependent: Mention) -> Self {
        TypedDependency { relation: relation.into(), governor, dependent }
    }

    /// Parses `rel(gov-i, dep-j)`.
    pub fn parse(text: &str) -> Option<TypedDependency> {
        let text = text.trim();
        let (rel, rest) = text.split_once('(')?;
        let inner = rest.strip_suffix(')')?;
        let (g, d) = inner.split_once(',')?;
        Some(TypedDependency::new(rel.trim(), Mention::parse(g.trim())?, Mention::parse(d.trim())?))
    }
}

impl fmt::Display for TypedDependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.relation, self.governor, self.dependent)
    }
}

/// One triple per line, in emission order.
pub fn format_dependencies(tds: &[TypedDependency]) -> String {
    tds.iter().map(|td| format!("{td}\n")).collect()
}
