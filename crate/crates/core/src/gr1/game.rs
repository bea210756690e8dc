use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::solve::{Counterstrategy, CsMemory};
use super::Gr1Spec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("output valuation is missing atom {0}")]
    MissingAtom(String),
    #[error("{0} is not an output atom")]
    UnknownAtom(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "violated", rename_all = "lowercase")]
pub enum Verdict {
    Ok,
    Violation(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub inputs: BTreeMap<String, bool>,
    pub outputs: BTreeMap<String, bool>,
    pub verdict: Verdict,
}

/// Names of system conjuncts violated by moving from `prev` to `pos`.
pub fn violations(spec: &Gr1Spec, prev: Option<u64>, pos: u64) -> Vec<String> {
    let mut out = Vec::new();
    for c in &spec.domain_s {
        if !c.expr.eval(pos, 0) {
            out.push(c.name.clone());
        }
    }
    if prev.is_none() {
        for c in &spec.alpha_s {
            if !c.expr.eval(pos, 0) {
                out.push(c.name.clone());
            }
        }
    }
    for c in &spec.beta_s {
        let ok = if c.expr.uses_next() {
            prev.is_none_or(|p| c.expr.eval(p, pos))
        } else {
            c.expr.eval(pos, 0)
        };
        if !ok && !out.contains(&c.name) {
            out.push(c.name.clone());
        }
    }
    out
}

/// Interactive game: the counterstrategy sets inputs, the user answers with
/// outputs and every answer is checked against the system obligations.
#[derive(Debug, Clone)]
pub struct GameSession {
    cs: Counterstrategy,
    memory: CsMemory,
    inputs: u64,
    prev: Option<u64>,
    pub transcript: Vec<StepRecord>,
}

impl GameSession {
    pub fn new(cs: Counterstrategy) -> Self {
        let memory = cs.initial_memory();
        let inputs = cs.initial_input;
        GameSession { cs, memory, inputs, prev: None, transcript: Vec::new() }
    }

    pub fn spec(&self) -> &Gr1Spec {
        &self.cs.spec
    }

    fn named(names: &[String], v: u64) -> BTreeMap<String, bool> {
        names.iter().enumerate().map(|(i, n)| (n.clone(), v >> i & 1 == 1)).collect()
    }

    /// Current input valuation chosen by the environment.
    pub fn inputs(&self) -> BTreeMap<String, bool> {
        Self::named(&self.cs.spec.inputs, self.inputs)
    }

    pub fn step(&mut self, outputs: &BTreeMap<String, bool>) -> Result<(Verdict, BTreeMap<String, bool>), ProtocolError> {
        let spec = &self.cs.spec;
        if let Some(extra) = outputs.keys().find(|k| !spec.outputs.contains(k)) {
            return Err(ProtocolError::UnknownAtom(extra.clone()));
        }
        let out = Gr1Spec::pack_names(&spec.outputs, outputs).map_err(ProtocolError::MissingAtom)?;
        let pos = spec.pack(self.inputs, out);
        let violated = violations(spec, self.prev, pos);
        let verdict = if violated.is_empty() { Verdict::Ok } else { Verdict::Violation(violated) };
        self.transcript.push(StepRecord {
            step: self.transcript.len(),
            inputs: self.inputs(),
            outputs: Self::named(&spec.outputs, out),
            verdict: verdict.clone(),
        });
        let (next, memory) = self.cs.next_move(&self.memory, out);
        self.memory = memory;
        self.prev = Some(pos);
        self.inputs = next;
        Ok((verdict, self.inputs()))
    }

    pub fn transcript_jsonl(&self) -> String {
        self.transcript.iter().map(|r| serde_json::to_string(r).expect("serializable") + "\n").collect()
    }
}
