#![allow(dead_code)]

use reqlift_core::corpus::{load_config, load_corpus, Config};
use reqlift_core::ir::default_rules;
use reqlift_core::ltl::Ltl;
use reqlift_core::pipeline::compile_corpus;

pub const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/isolette");

pub fn config() -> Config {
    load_config(format!("{DATA}/config.json")).unwrap()
}

pub fn formulas_from(files: &[&str]) -> Vec<Ltl> {
    let config = config();
    let mut docs = Vec::new();
    for f in files {
        docs.extend(load_corpus(format!("{DATA}/{f}")).unwrap());
    }
    for (i, d) in docs.iter_mut().enumerate() {
        d.id = i as u32 + 1;
    }
    let (compiled, failed) = compile_corpus(&docs, &config, &default_rules());
    assert!(failed.is_empty(), "{failed:?}");
    compiled.iter().map(|c| c.formula().clone()).collect()
}

pub fn case_study() -> Vec<Ltl> {
    formulas_from(&["corpus.txt"])
}

pub struct Built {
    pub formulas: Vec<Ltl>,
    pub symbols: reqlift_core::types::SymbolTable,
    pub placements: Vec<reqlift_core::model::Placement>,
    pub model: reqlift_core::model::TransitionModel,
}

pub fn build(files: &[&str]) -> Built {
    use reqlift_core::model::{emit_model, place_formula};
    use reqlift_core::types::{gather_evidence, merge_types, reconcile_categories};
    let formulas = formulas_from(files);
    let (mut symbols, _) = merge_types(&gather_evidence(&formulas), &config().partition);
    reconcile_categories(&mut symbols, &formulas);
    let placements: Vec<_> = formulas.iter().map(|f| place_formula(f, &symbols, false).unwrap()).collect();
    let placed: Vec<_> = formulas.iter().cloned().zip(placements.iter().copied()).collect();
    let model = emit_model("isolette", &placed, &symbols).unwrap();
    Built { formulas, symbols, placements, model }
}

pub fn gr1_spec() -> reqlift_core::gr1::Gr1Spec {
    let b = build(&["corpus.txt"]);
    let named: Vec<(String, Ltl)> = b.formulas.iter().enumerate().map(|(i, f)| ((i + 1).to_string(), f.clone())).collect();
    reqlift_core::gr1::build_gr1(&named, &b.symbols, None, true).unwrap()
}

pub fn mined_assumption() -> Ltl {
    reqlift_core::ltl::parse("G(!(Regulator_Status = TRUE & Regulator_Init_Timeout = TRUE))").unwrap()
}

pub fn gr1_spec_with_assumption() -> reqlift_core::gr1::Gr1Spec {
    let mut spec = gr1_spec();
    spec.add_assumption("a", &mined_assumption()).unwrap();
    spec
}
