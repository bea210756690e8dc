//! Requirement corpora, glossary/partition configuration and perturbation
//! rewrites.
//!
//! Corpus files hold one requirement per line as `source_tag | sentence`;
//! blank lines and lines starting with `#` are skipped. An optional explicit
//! numeric id may precede the tag: `7 | REQ-MHS-2 | If ...`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{parse_with_vars, Ltl};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: duplicate requirement id {id}")]
    DuplicateId { line: usize, id: u32 },
    #[error("line {line}: empty sentence")]
    EmptySentence { line: usize },
    #[error("line {line}: malformed requirement line")]
    Malformed { line: usize },
    #[error("malformed config: {0}")]
    Config(String),
    #[error("malformed identifier {0:?}")]
    BadIdentifier(String),
    #[error("variable {var} appears in both {first} and {second}")]
    Overlap { var: String, first: &'static str, second: &'static str },
    #[error("line {line}: {message}")]
    Formula { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementDoc {
    pub id: u32,
    pub source_tag: String,
    pub text: String,
}

impl RequirementDoc {
    pub fn new(id: u32, source_tag: impl Into<String>, text: impl Into<String>) -> Self {
        RequirementDoc { id, source_tag: source_tag.into(), text: text.into() }
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<RequirementDoc>, CorpusError> {
    let mut docs: Vec<RequirementDoc> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split('|').map(str::trim).collect();
        let (explicit, tag, sentence) = match parts.as_slice() {
            [sentence] => (None, "", *sentence),
            [tag, sentence] => (None, *tag, *sentence),
            [id, tag, sentence] => {
                let id: u32 = id.parse().map_err(|_| CorpusError::Malformed { line })?;
                (Some(id), *tag, *sentence)
            }
            _ => return Err(CorpusError::Malformed { line }),
        };
        if sentence.is_empty() {
            return Err(CorpusError::EmptySentence { line });
        }
        let id = match explicit {
            Some(id) => {
                if !seen.insert(id) {
                    return Err(CorpusError::DuplicateId { line, id });
                }
                id
            }
            None => {
                let mut next = docs.len() as u32 + 1;
                while seen.contains(&next) {
                    next += 1;
                }
                seen.insert(next);
                next
            }
        };
        let mut text = sentence.to_string();
        if !text.ends_with('.') {
            text.push('.');
        }
        docs.push(RequirementDoc { id, source_tag: tag.to_string(), text });
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<RequirementDoc>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    parse_corpus(&text)
}

/// Reads one formula per line; `#` comments and blank lines are skipped.
/// Identifiers in `vars` parse as variables on either side of a comparison.
pub fn load_golden(path: impl AsRef<Path>, vars: &BTreeSet<String>) -> Result<Vec<Ltl>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            parse_with_vars(l, vars).map_err(|e| CorpusError::Formula { line: i + 1, message: e.to_string() })
        })
        .collect()
}

/// Serializes a corpus in the file format, with explicit ids.
pub fn write_corpus(docs: &[RequirementDoc]) -> String {
    docs.iter().map(|d| format!("{} | {} | {}\n", d.id, d.source_tag, d.text)).collect()
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlossaryEntry {
    pub phrase: Vec<String>,
    pub term: String,
}

/// Surface phrases mapped to canonical terms, longest phrase first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Glossary {
    entries: Vec<GlossaryEntry>,
}

impl Glossary {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Self, CorpusError> {
        let mut entries = Vec::new();
        for (phrase, term) in pairs {
            if !is_identifier(&term) {
                return Err(CorpusError::BadIdentifier(term));
            }
            let phrase: Vec<String> = phrase.split_whitespace().map(str::to_string).collect();
            if phrase.is_empty() {
                return Err(CorpusError::Config("empty glossary phrase".into()));
            }
            entries.push(GlossaryEntry { phrase, term });
        }
        // stable: equal-length phrases keep file order
        entries.sort_by(|a, b| b.phrase.len().cmp(&a.phrase.len()));
        Ok(Glossary { entries })
    }

    pub fn entries(&self) -> &[GlossaryEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest entry whose phrase matches `words` at `start` (case-insensitive).
    pub fn match_at(&self, words: &[&str], start: usize) -> Option<&GlossaryEntry> {
        self.entries.iter().find(|e| {
            start + e.phrase.len() <= words.len()
                && e.phrase.iter().zip(&words[start..]).all(|(p, w)| p.eq_ignore_ascii_case(w))
        })
    }
}

/// User-supplied variable categories; anything unlisted is a wire.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariablePartition {
    pub inputs: BTreeSet<String>,
    pub state_and_output: BTreeSet<String>,
    pub pure_output: BTreeSet<String>,
    #[serde(default)]
    pub state_only: BTreeSet<String>,
}

impl VariablePartition {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let sets: [(&'static str, &BTreeSet<String>); 4] = [
            ("inputs", &self.inputs),
            ("state_and_output", &self.state_and_output),
            ("pure_output", &self.pure_output),
            ("state_only", &self.state_only),
        ];
        for (name, set) in &sets {
            if let Some(bad) = set.iter().find(|v| !is_identifier(v)) {
                return Err(CorpusError::BadIdentifier(format!("{bad} (in {name})")));
            }
        }
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if let Some(v) = sets[i].1.intersection(sets[j].1).next() {
                    return Err(CorpusError::Overlap { var: v.clone(), first: sets[i].0, second: sets[j].0 });
                }
            }
        }
        Ok(())
    }

    pub fn declared(&self) -> impl Iterator<Item = &String> {
        self.inputs
            .iter()
            .chain(&self.state_and_output)
            .chain(&self.pure_output)
            .chain(&self.state_only)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.declared().any(|v| v == name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub glossary: Glossary,
    pub partition: VariablePartition,
    /// Exclude `A < B` and `A > C` holding together (lower bound below upper bound).
    pub exclusive_comparisons: bool,
}

#[derive(Deserialize)]
struct RawConfig {
    #[serde(default)]
    glossary: Vec<(String, String)>,
    #[serde(default)]
    inputs: BTreeSet<String>,
    #[serde(default)]
    state_and_output: BTreeSet<String>,
    #[serde(default)]
    pure_output: BTreeSet<String>,
    #[serde(default)]
    state_only: BTreeSet<String>,
    #[serde(default = "default_true")]
    exclusive_comparisons: bool,
}

fn default_true() -> bool {
    true
}

pub fn parse_config(text: &str) -> Result<Config, CorpusError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CorpusError::Config(e.to_string()))?;
    let partition = VariablePartition {
        inputs: raw.inputs,
        state_and_output: raw.state_and_output,
        pure_output: raw.pure_output,
        state_only: raw.state_only,
    };
    partition.validate()?;
    Ok(Config {
        glossary: Glossary::new(raw.glossary)?,
        partition,
        exclusive_comparisons: raw.exclusive_comparisons,
    })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PerturbationRule {
    AndToOrFirst,
    AndToOrAll,
    IsToIsNotAll,
    IfThenSwap,
}

impl PerturbationRule {
    pub const ALL: [PerturbationRule; 4] = [
        PerturbationRule::AndToOrFirst,
        PerturbationRule::AndToOrAll,
        PerturbationRule::IsToIsNotAll,
        PerturbationRule::IfThenSwap,
    ];
}

impl fmt::Display for PerturbationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PerturbationRule::AndToOrFirst => "and-to-or-first",
            PerturbationRule::AndToOrAll => "and-to-or-all",
            PerturbationRule::IsToIsNotAll => "is-to-is-not-all",
            PerturbationRule::IfThenSwap => "if-then-swap",
        })
    }
}

impl std::str::FromStr for PerturbationRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        PerturbationRule::ALL
            .into_iter()
            .find(|r| r.to_string() == s)
            .ok_or_else(|| format!("unknown perturbation rule {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perturbed {
    pub doc: RequirementDoc,
    pub affected: bool,
}

#[derive(Debug, Clone)]
struct Word {
    text: String,
    /// Inside a glossary phrase: never rewritten.
    protected: bool,
}

/// Splits on whitespace, detaching a trailing `,` or `.` into its own word.
fn split_words(text: &str, glossary: &Glossary) -> Vec<Word> {
    let mut words: Vec<Word> = Vec::new();
    for raw in text.split_whitespace() {
        let mut core = raw;
        let mut tail = Vec::new();
        while let Some(stripped) = core.strip_suffix([',', '.']) {
            tail.push(core[stripped.len()..].to_string());
            core = stripped;
        }
        if !core.is_empty() {
            words.push(Word { text: core.to_string(), protected: false });
        }
        for t in tail.into_iter().rev() {
            words.push(Word { text: t, protected: false });
        }
    }
    let texts: Vec<&str> = words.iter().map(|w| w.text.as_str()).collect();
    let mut protect = vec![false; words.len()];
    let mut i = 0;
    while i < texts.len() {
        if let Some(e) = glossary.match_at(&texts, i) {
            protect[i..i + e.phrase.len()].iter_mut().for_each(|p| *p = true);
            i += e.phrase.len();
        } else {
            i += 1;
        }
    }
    for (w, p) in words.iter_mut().zip(protect) {
        w.protected = p;
    }
    words
}

fn join_words(words: &[Word]) -> String {
    let mut out = String::new();
    for w in words {
        if !out.is_empty() && !matches!(w.text.as_str(), "," | ".") {
            out.push(' ');
        }
        out.push_str(&w.text);
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

fn decapitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

pub fn perturb(doc: &RequirementDoc, rule: PerturbationRule) -> Perturbed {
    perturb_with(doc, rule, &Glossary::default())
}

/// Applies a textual rewrite; words inside glossary phrases are left alone.
pub fn perturb_with(doc: &RequirementDoc, rule: PerturbationRule, glossary: &Glossary) -> Perturbed {
    let mut words = split_words(&doc.text, glossary);
    let affected = match rule {
        PerturbationRule::AndToOrFirst | PerturbationRule::AndToOrAll => {
            let mut changed = false;
            for w in words.iter_mut().filter(|w| !w.protected) {
                if w.text.eq_ignore_ascii_case("and") {
                    w.text = if w.text == "And" { "Or".into() } else { "or".into() };
                    changed = true;
                    if rule == PerturbationRule::AndToOrFirst {
                        break;
                    }
                }
            }
            changed
        }
        PerturbationRule::IsToIsNotAll => {
            let mut out = Vec::with_capacity(words.len() + 4);
            let mut changed = false;
            let mut i = 0;
            while i < words.len() {
                let w = &words[i];
                out.push(w.clone());
                i += 1;
                if !w.protected && w.text.eq_ignore_ascii_case("is") {
                    changed = true;
                    let nots = words[i..]
                        .iter()
                        .take_while(|n| !n.protected && n.text.eq_ignore_ascii_case("not"))
                        .count();
                    // Flip the parity of the run of negations.
                    let keep = if nots % 2 == 0 { nots + 1 } else { nots - 1 };
                    let sample = words.get(i).filter(|_| nots > 0).cloned();
                    for _ in 0..keep {
                        out.push(sample.clone().unwrap_or(Word { text: "not".into(), protected: false }));
                    }
                    i += nots;
                }
            }
            words = out;
            changed
        }
        PerturbationRule::IfThenSwap => match swap_if_then(&words) {
            Some(swapped) => {
                words = swapped;
                true
            }
            None => false,
        },
    };
    let text = if affected { join_words(&words) } else { doc.text.clone() };
    Perturbed { doc: RequirementDoc { text, ..doc.clone() }, affected }
}

/// `If C, M.` becomes `M, if C.`; the condition ends at the last top-level comma.
fn swap_if_then(words: &[Word]) -> Option<Vec<Word>> {
    if !words.first()?.text.eq_ignore_ascii_case("if") {
        return None;
    }
    let body_end = if words.last()?.text == "." { words.len() - 1 } else { words.len() };
    let shall = words.iter().position(|w| w.text.eq_ignore_ascii_case("shall"))?;
    let comma = words[..shall].iter().rposition(|w| w.text == ",")?;
    let cond = &words[1..comma];
    let main = &words[comma + 1..body_end];
    if cond.is_empty() || main.is_empty() {
        return None;
    }
    let mut out: Vec<Word> = Vec::new();
    for (i, w) in main.iter().enumerate() {
        let mut w = w.clone();
        if i == 0 {
            w.text = capitalize(&w.text);
        }
        out.push(w);
    }
    out.push(Word { text: ",".into(), protected: false });
    out.push(Word { text: decapitalize(&words[0].text), protected: false });
    out.extend(cond.iter().cloned());
    out.push(Word { text: ".".into(), protected: false });
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const REQ13: &str = "If the Regulator Mode equals INIT and the Regulator Status equals True, the Regulator Mode shall be set to NORMAL.";

    #[test]
    fn loads_single_line_with_tag() {
        let docs = parse_corpus(
            "REQ-MRI-1 | If the Regulator Mode equals INIT, the Output Regulator Status shall be set to Init.\n",
        )
        .unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].id, 1);
        assert_eq!(docs[0].source_tag, "REQ-MRI-1");
    }

    #[test]
    fn empty_file_gives_empty_corpus() {
        assert!(parse_corpus("").unwrap().is_empty());
        assert!(parse_corpus("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_explicit_id_is_rejected() {
        let err = parse_corpus("3 | A | x equals y.\n3 | B | y equals z.\n").unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { line: 2, id: 3 }));
    }

    #[test]
    fn empty_sentence_is_rejected() {
        assert!(matches!(parse_corpus("TAG | \n"), Err(CorpusError::EmptySentence { line: 1 })));
    }

    #[test]
    fn shipped_corpus_has_fifteen_docs() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/isolette/corpus.txt");
        let docs = load_corpus(path).unwrap();
        assert_eq!(docs.len(), 15);
        assert_eq!(docs.iter().map(|d| d.id).collect::<Vec<_>>(), (1..=15).collect::<Vec<_>>());
    }

    #[test]
    fn overlapping_partition_is_rejected() {
        let err = parse_config(r#"{"inputs": ["x"], "pure_output": ["x"]}"#).unwrap_err();
        assert!(matches!(err, CorpusError::Overlap { .. }));
        assert!(matches!(parse_config(r#"{"inputs": ["9x"]}"#), Err(CorpusError::BadIdentifier(_))));
    }

    #[test]
    fn glossary_is_longest_first() {
        let cfg = parse_config(r#"{"glossary": [["Heat", "Heat"], ["Heat Control", "Heat_Control"]]}"#).unwrap();
        assert_eq!(cfg.glossary.entries()[0].term, "Heat_Control");
        assert!(cfg.exclusive_comparisons);
    }

    #[test]
    fn case_study_config() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/isolette/config.json");
        let cfg = load_config(path).unwrap();
        assert!(cfg.partition.inputs.contains("Regulator_Init_Timeout"));
        assert_eq!(cfg.partition.state_and_output, BTreeSet::from(["Regulator_Mode".to_string()]));
        assert_eq!(
            cfg.partition.pure_output,
            BTreeSet::from(["Output_Regulator_Status".to_string(), "Heat_Control".to_string()])
        );
    }

    #[test]
    fn and_to_or_all() {
        let doc = RequirementDoc::new(13, "Req MRM 2", REQ13);
        let p = perturb(&doc, PerturbationRule::AndToOrAll);
        assert!(p.affected);
        assert!(p.doc.text.contains("equals INIT or the Regulator Status equals True"));
        assert_eq!(p.doc.source_tag, "Req MRM 2");
    }

    #[test]
    fn if_then_swap() {
        let doc = RequirementDoc::new(13, "Req MRM 2", REQ13);
        let p = perturb(&doc, PerturbationRule::IfThenSwap);
        assert_eq!(
            p.doc.text,
            "The Regulator Mode shall be set to NORMAL, if the Regulator Mode equals INIT and the Regulator Status equals True."
        );
    }

    #[test]
    fn no_trigger_leaves_text_unaffected() {
        let doc = RequirementDoc::new(1, "t", "If the Regulator Mode equals INIT, the Heat Control shall be set to Off.");
        let p = perturb(&doc, PerturbationRule::AndToOrFirst);
        assert!(!p.affected);
        assert_eq!(p.doc, doc);
    }

    #[test]
    fn glossary_phrases_are_protected() {
        let g = Glossary::new([("Rock and Roll".to_string(), "Rock_and_Roll".to_string())]).unwrap();
        let doc = RequirementDoc::new(1, "t", "If the Rock and Roll equals On and x equals y, z shall be set to A.");
        let p = perturb_with(&doc, PerturbationRule::AndToOrAll, &g);
        assert_eq!(p.doc.text, "If the Rock and Roll equals On or x equals y, z shall be set to A.");
    }

    fn arb_sentence() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop_oneof![
                Just("and"), Just("is"), Just("not"), Just("the"), Just("Mode"), Just("equals"),
                Just("set"), Just("to"), Just("X"), Just("Band"), Just("island"), Just(",")
            ],
            1..14,
        )
        .prop_map(|ws| {
            let mut s = String::new();
            for w in ws {
                if !s.is_empty() && w != "," {
                    s.push(' ');
                }
                s.push_str(w);
            }
            s + "."
        })
    }

    proptest! {
        #[test]
        fn corpus_round_trip(texts in prop::collection::vec("[A-Za-z ]{1,20}", 0..6)) {
            let docs: Vec<RequirementDoc> = texts
                .iter()
                .enumerate()
                .filter(|(_, t)| !t.trim().is_empty())
                .map(|(i, t)| RequirementDoc::new(i as u32 + 1, format!("T{i}"), format!("{}.", t.trim())))
                .collect();
            let back = parse_corpus(&write_corpus(&docs)).unwrap();
            prop_assert_eq!(back, docs);
        }

        #[test]
        fn is_not_applied_twice_restores(s in arb_sentence()) {
            let doc = RequirementDoc::new(1, "t", s);
            let once = perturb(&doc, PerturbationRule::IsToIsNotAll);
            let twice = perturb(&once.doc, PerturbationRule::IsToIsNotAll);
            let norm = |t: &str| split_words(t, &Glossary::default()).into_iter().map(|w| w.text).collect::<Vec<_>>();
            prop_assert_eq!(norm(&twice.doc.text), norm(&doc.text));
        }

        #[test]
        fn and_to_or_token_changes(s in arb_sentence()) {
            let doc = RequirementDoc::new(1, "t", s);
            let before: Vec<String> = split_words(&doc.text, &Glossary::default()).into_iter().map(|w| w.text).collect();
            let first: Vec<String> = split_words(&perturb(&doc, PerturbationRule::AndToOrFirst).doc.text, &Glossary::default()).into_iter().map(|w| w.text).collect();
            let all: Vec<String> = split_words(&perturb(&doc, PerturbationRule::AndToOrAll).doc.text, &Glossary::default()).into_iter().map(|w| w.text).collect();
            prop_assert_eq!(first.len(), before.len());
            prop_assert!(before.iter().zip(&first).filter(|(a, b)| a != b).count() <= 1);
            for (a, b) in before.iter().zip(&all) {
                if a == "and" { prop_assert_eq!(b, "or"); } else { prop_assert_eq!(a, b); }
            }
        }
    }
}
