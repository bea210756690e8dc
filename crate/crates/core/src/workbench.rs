//! End-to-end commands behind the CLI: compile a corpus into formulas and a
//! model, and check the formulas for consistency, theorems or realizability.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{check_consistency, model_check, CheckResult, Consistency, KripkeOptions, ResourceError};
use crate::corpus::{Config, RequirementDoc};
use crate::gr1::{build_gr1, check_realizability, Gr1Spec, NonGr1Error, Realizability, SolveOptions};
use crate::ir::default_rules;
use crate::ltl::{parse_with_vars, Ltl, ParseLtlError};
use crate::model::{emit_model, find_overlaps, place_formula, ModelError, Placement, PlacementError, TransitionModel};
use crate::pipeline::{compile_corpus, CompileError};
use crate::types::{gather_evidence, merge_types, reconcile_categories, SymbolTable};

/// A formula with the requirement it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedFormula {
    /// Position in the formula list, from 1.
    pub name: String,
    pub source_tag: String,
    pub formula: Ltl,
}

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    NonGr1(#[from] NonGr1Error),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("line {line}: {source}")]
    Formula {
        line: usize,
        #[source]
        source: ParseLtlError,
    },
}

#[derive(Debug)]
pub struct CompileArtifacts {
    pub formulas: Vec<NamedFormula>,
    pub placements: Vec<Placement>,
    pub symbols: SymbolTable,
    pub model: TransitionModel,
    pub warnings: Vec<String>,
    pub errors: Vec<CompileError>,
}

impl CompileArtifacts {
    pub fn exit_code(&self) -> i32 {
        if self.errors.is_empty() {
            0
        } else {
            1
        }
    }

    pub fn formulas_text(&self) -> String {
        write_formulas(&self.formulas)
    }
}

/// Formula file: each formula preceded by a `# name | source_tag` line.
pub fn write_formulas(formulas: &[NamedFormula]) -> String {
    let mut out = String::new();
    for f in formulas {
        let _ = writeln!(out, "# {} | {}", f.name, f.source_tag);
        let _ = writeln!(out, "{}", f.formula);
    }
    out
}

pub fn read_formulas(text: &str, vars: &BTreeSet<String>) -> Result<Vec<NamedFormula>, WorkbenchError> {
    let mut out = Vec::new();
    let mut tag = String::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            tag = comment.split_once('|').map(|(_, t)| t.trim().to_string()).unwrap_or_default();
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let formula = parse_with_vars(line, vars).map_err(|source| WorkbenchError::Formula { line: i + 1, source })?;
        out.push(NamedFormula { name: (out.len() + 1).to_string(), source_tag: std::mem::take(&mut tag), formula });
    }
    Ok(out)
}

/// Symbols for a formula list, categories reconciled with assignments.
pub fn infer_symbols(formulas: &[Ltl], config: &Config) -> (SymbolTable, Vec<String>) {
    let (mut symbols, mut warnings) = merge_types(&gather_evidence(formulas), &config.partition);
    warnings.extend(reconcile_categories(&mut symbols, formulas));
    (symbols, warnings)
}

pub fn build_model(
    name: &str,
    formulas: &[Ltl],
    explicit: &[bool],
    symbols: &SymbolTable,
) -> Result<(Vec<Placement>, TransitionModel), WorkbenchError> {
    let placements: Vec<Placement> = formulas
        .iter()
        .zip(explicit.iter().copied().chain(std::iter::repeat(false)))
        .map(|(f, e)| place_formula(f, symbols, e))
        .collect::<Result<_, _>>()?;
    let placed: Vec<(Ltl, Placement)> = formulas.iter().cloned().zip(placements.iter().copied()).collect();
    Ok((placements, emit_model(name, &placed, symbols)?))
}

pub fn cmd_compile(docs: &[RequirementDoc], config: &Config) -> Result<CompileArtifacts, WorkbenchError> {
    let (compiled, errors) = compile_corpus(docs, config, &default_rules());
    let mut warnings: Vec<String> = Vec::new();
    for c in &compiled {
        warnings.extend(c.warnings().map(|w| format!("requirement {}: {w}", c.doc.id)));
    }
    let formulas: Vec<NamedFormula> = compiled
        .iter()
        .enumerate()
        .map(|(i, c)| NamedFormula { name: (i + 1).to_string(), source_tag: c.doc.source_tag.clone(), formula: c.formula().clone() })
        .collect();
    let plain: Vec<Ltl> = formulas.iter().map(|f| f.formula.clone()).collect();
    let (symbols, type_warnings) = infer_symbols(&plain, config);
    warnings.extend(type_warnings);
    let explicit: Vec<bool> = compiled.iter().map(|c| c.graph.nodes.values().any(|n| n.temporal.is_some())).collect();
    let (placements, model) = build_model("requirements", &plain, &explicit, &symbols)?;
    let transitions: Vec<usize> =
        placements.iter().enumerate().filter(|(_, p)| **p == Placement::Transition).map(|(i, _)| i + 1).collect();
    for o in find_overlaps(&model, &symbols) {
        warnings.push(format!(
            "nondeterminism: formulas {} and {} assign different values to {} when {}",
            transitions[o.first], transitions[o.second], o.var, o.condition
        ));
    }
    Ok(CompileArtifacts { formulas, placements, symbols, model, warnings, errors })
}

#[derive(Debug, Clone)]
pub enum CheckMode {
    Consistency,
    Theorem(Ltl),
    Realizability { assumptions: Vec<Ltl> },
}

#[derive(Debug, Clone)]
pub enum CheckReport {
    Consistent { witness: String },
    Inconsistent,
    Holds,
    Counterexample { lasso: String },
    Realizable { machine: crate::gr1::MooreMachine, spec: Box<Gr1Spec> },
    Unrealizable { counterstrategy: Box<crate::gr1::Counterstrategy> },
}

impl CheckReport {
    pub fn verdict(&self) -> &'static str {
        match self {
            CheckReport::Consistent { .. } => "consistent",
            CheckReport::Inconsistent => "inconsistent",
            CheckReport::Holds => "holds",
            CheckReport::Counterexample { .. } => "counterexample",
            CheckReport::Realizable { .. } => "realizable",
            CheckReport::Unrealizable { .. } => "unrealizable",
        }
    }

    pub fn summary(&self) -> String {
        match self {
            CheckReport::Consistent { witness } => format!("consistent\n{witness}"),
            CheckReport::Counterexample { lasso } => format!("counterexample\n{lasso}"),
            CheckReport::Realizable { machine, .. } => format!("realizable: Moore machine with {} states", machine.len()),
            CheckReport::Unrealizable { counterstrategy } => {
                let spec = &counterstrategy.spec;
                let inputs = spec.valuation(counterstrategy.initial_input).into_iter().filter(|(k, _)| spec.inputs.contains(k)).collect();
                let first: Vec<String> = spec.encoding.decode(&inputs).into_iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("unrealizable: first environment move {}", first.join(" "))
            }
            other => other.verdict().to_string(),
        }
    }
}

/// GR(1) spec for named formulas, with assumptions on the environment side.
pub fn gr1_spec(formulas: &[NamedFormula], config: &Config, assumptions: &[Ltl]) -> Result<Gr1Spec, WorkbenchError> {
    let plain: Vec<Ltl> = formulas.iter().map(|f| f.formula.clone()).collect();
    let (symbols, _) = infer_symbols(&plain, config);
    let named: Vec<(String, Ltl)> = formulas.iter().map(|f| (f.name.clone(), f.formula.clone())).collect();
    let mut spec = build_gr1(&named, &symbols, None, true)?;
    for (k, a) in assumptions.iter().enumerate() {
        spec.add_assumption(&format!("assumption {}", k + 1), a)?;
    }
    Ok(spec)
}

pub fn cmd_check(formulas: &[NamedFormula], config: &Config, mode: &CheckMode) -> Result<CheckReport, WorkbenchError> {
    let plain: Vec<Ltl> = formulas.iter().map(|f| f.formula.clone()).collect();
    Ok(match mode {
        CheckMode::Consistency => {
            let (symbols, _) = infer_symbols(&plain, config);
            match check_consistency(&plain, &symbols, true) {
                (Consistency::Consistent(lasso), enc) => CheckReport::Consistent { witness: lasso.render(&enc) },
                (Consistency::Inconsistent, _) => CheckReport::Inconsistent,
            }
        }
        CheckMode::Theorem(theorem) => {
            let (symbols, _) = infer_symbols(&plain, config);
            let (_, model) = build_model("requirements", &plain, &[], &symbols)?;
            let report = model_check(&model, theorem, &KripkeOptions::default())?;
            match report.result {
                CheckResult::Holds => CheckReport::Holds,
                CheckResult::Counterexample(lasso) => CheckReport::Counterexample { lasso: lasso.render(&report.encoding) },
            }
        }
        CheckMode::Realizability { assumptions } => {
            let spec = gr1_spec(formulas, config, assumptions)?;
            match check_realizability(&spec, &SolveOptions::default())? {
                Realizability::Realizable(machine) => CheckReport::Realizable { machine, spec: Box::new(spec) },
                Realizability::Unrealizable(cs) => CheckReport::Unrealizable { counterstrategy: cs },
            }
        }
    })
}
