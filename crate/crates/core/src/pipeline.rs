//! Sentence-to-formula pipeline shared by the workbench commands.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Config, RequirementDoc};
use crate::formula_gen::{translate_with, TranslateOptions, Translation};
use crate::frontend::{parse_dependencies, preprocess, DependencyParse, ParseError, PreprocessedSentence};
use crate::ir::{apply_type_rules, build_predicate_graph, IRTable, IrError, PredicateGraph, TypeRule};
use crate::ltl::Ltl;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("requirement {id}: {source}")]
    Parse {
        id: u32,
        #[source]
        source: ParseError,
    },
    #[error("requirement {id}: {source}")]
    Ir {
        id: u32,
        #[source]
        source: IrError,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct CompiledSentence {
    pub doc: RequirementDoc,
    pub preprocessed: PreprocessedSentence,
    pub parse: DependencyParse,
    pub ir: IRTable,
    pub graph: PredicateGraph,
    pub translation: Translation,
}

impl CompiledSentence {
    pub fn formula(&self) -> &Ltl {
        &self.translation.formula
    }

    pub fn warnings(&self) -> impl Iterator<Item = &String> {
        self.parse.warnings.iter().chain(&self.translation.warnings)
    }
}

pub fn compile_sentence(doc: &RequirementDoc, config: &Config, rules: &[TypeRule]) -> Result<CompiledSentence, CompileError> {
    let preprocessed = preprocess(&doc.text, &config.glossary);
    let parse = parse_dependencies(&preprocessed).map_err(|source| CompileError::Parse { id: doc.id, source })?;
    let ir = apply_type_rules(&parse.tds, rules).map_err(|source| CompileError::Ir { id: doc.id, source })?;
    let graph = build_predicate_graph(&ir).map_err(|source| CompileError::Ir { id: doc.id, source })?;
    let opts = TranslateOptions {
        declared: config.partition.declared().cloned().collect(),
        arith_decode: preprocessed.arith_decode.clone(),
    };
    let translation = translate_with(&graph, &opts);
    Ok(CompiledSentence { doc: doc.clone(), preprocessed, parse, ir, graph, translation })
}

/// Compiles every requirement; failures are collected, not fatal.
pub fn compile_corpus(
    docs: &[RequirementDoc],
    config: &Config,
    rules: &[TypeRule],
) -> (Vec<CompiledSentence>, Vec<CompileError>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for doc in docs {
        match compile_sentence(doc, config, rules) {
            Ok(c) => ok.push(c),
            Err(e) => failed.push(e),
        }
    }
    (ok, failed)
}
