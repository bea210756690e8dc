mod common;
mod oracles;

use oracles::perturb::{and_to_or, is_to_is_not};
use reqlift_core::corpus::{load_corpus, load_golden, perturb_with, PerturbationRule, RequirementDoc};
use reqlift_core::ir::default_rules;
use reqlift_core::ltl::Ltl;
use reqlift_core::pipeline::compile_sentence;

fn shipped() -> (Vec<RequirementDoc>, Vec<Ltl>) {
    let docs = load_corpus(format!("{}/corpus.txt", common::DATA)).unwrap();
    let vars = common::config().partition.declared().cloned().collect();
    (docs, load_golden(format!("{}/golden.ltl", common::DATA), &vars).unwrap())
}

fn compile(doc: &RequirementDoc) -> Ltl {
    let config = common::config();
    compile_sentence(doc, &config, &default_rules()).unwrap_or_else(|e| panic!("{}: {e}", doc.text)).formula().clone()
}

#[test]
fn and_to_or_all_matches_transformed_golden() {
    let (docs, golden) = shipped();
    let glossary = common::config().glossary;
    let mut applicable = 0;
    for (doc, g) in docs.iter().zip(&golden) {
        let p = perturb_with(doc, PerturbationRule::AndToOrAll, &glossary);
        if !p.affected {
            continue;
        }
        applicable += 1;
        assert_eq!(compile(&p.doc).normalize(), and_to_or(g).normalize(), "{}", p.doc.text);
    }
    assert_eq!(applicable, 7);
}

#[test]
fn is_to_is_not_all_matches_transformed_golden() {
    let (docs, golden) = shipped();
    let glossary = common::config().glossary;
    let mut applicable = 0;
    for (doc, g) in docs.iter().zip(&golden) {
        let p = perturb_with(doc, PerturbationRule::IsToIsNotAll, &glossary);
        if !p.affected {
            continue;
        }
        applicable += 1;
        assert_eq!(compile(&p.doc).normalize(), is_to_is_not(&doc.text, g).normalize(), "{}", p.doc.text);
    }
    assert_eq!(applicable, 6);
}

#[test]
fn if_then_swap_parses_to_the_same_formula() {
    let (docs, golden) = shipped();
    let glossary = common::config().glossary;
    for (doc, g) in docs.iter().zip(&golden) {
        let p = perturb_with(doc, PerturbationRule::IfThenSwap, &glossary);
        if p.affected {
            assert_eq!(compile(&p.doc).normalize(), g.normalize(), "{}", p.doc.text);
        }
    }
}
