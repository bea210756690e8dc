mod common;
mod oracles;

use std::collections::BTreeSet;

use proptest::prelude::*;
use reqlift_core::automata::{
    accepts, build_kripke, check_consistency, is_empty, ltl_to_buchi, model_check, CheckResult, Consistency,
    KripkeOptions, Lasso, ResourceError, Valuation,
};
use oracles::lasso::{all_lassos, arb_formula, satisfies};
use reqlift_core::ltl::{parse, parse_with_vars};

const THEOREM: &str = "G((Regulator_Mode = FAILED) => NOT(F(Regulator_Mode = NORMAL)))";

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn automaton_agrees_with_lasso_semantics(f in arb_formula()) {
        let a = ltl_to_buchi(&f);
        match is_empty(&a) {
            Some(w) => prop_assert!(satisfies(&f, &w.prefix, &w.cycle), "witness {:?} violates {}", w, f),
            None => {
                for (u, v) in all_lassos(3) {
                    prop_assert!(!satisfies(&f, &u, &v), "{} has model {:?}/{:?}", f, u, v);
                }
            }
        }
        for (u, v) in all_lassos(2) {
            prop_assert_eq!(accepts(&a, &u, &v), satisfies(&f, &u, &v), "{} on {:?}/{:?}", f, u, v);
        }
    }
}

#[test]
fn theorem_holds_on_case_study() {
    let b = common::build(&["corpus.txt"]);
    let r = model_check(&b.model, &parse(THEOREM).unwrap(), &KripkeOptions::default()).unwrap();
    assert_eq!(r.result, CheckResult::Holds);
}

#[test]
fn failed_to_init_gives_counterexample() {
    let b = common::build(&["corpus.txt", "failed_to_init.txt"]);
    let r = model_check(&b.model, &parse(THEOREM).unwrap(), &KripkeOptions::default()).unwrap();
    let CheckResult::Counterexample(l) = &r.result else { panic!("expected a counterexample") };
    let modes: Vec<String> = l
        .steps()
        .map(|s| r.encoding.decode(s).into_iter().find(|(k, _)| k == "Regulator_Mode").unwrap().1)
        .collect();
    let failed = modes.iter().position(|m| m == "FAILED").expect("visits FAILED");
    let unrolled: Vec<&String> = modes.iter().chain(&modes[l.prefix.len()..]).collect();
    assert!(unrolled[failed..].iter().any(|m| *m == "NORMAL"), "{modes:?}");
    let table = l.render(&r.encoding);
    assert!(table.contains("Regulator_Mode=FAILED"));
    assert!(table.contains("-- cycle --"));
}

#[test]
fn trivial_theorem_holds() {
    let b = common::build(&["corpus.txt"]);
    let r = model_check(&b.model, &parse("G(TRUE)").unwrap(), &KripkeOptions::default()).unwrap();
    assert_eq!(r.result, CheckResult::Holds);
}

#[test]
fn state_cap_is_enforced() {
    let b = common::build(&["corpus.txt"]);
    let opts = KripkeOptions { max_states: 4, ..Default::default() };
    assert_eq!(
        model_check(&b.model, &parse(THEOREM).unwrap(), &opts).unwrap_err(),
        ResourceError::TooManyStates { cap: 4 }
    );
}

#[test]
fn case_study_is_consistent() {
    let b = common::build(&["corpus.txt"]);
    let (c, enc) = check_consistency(&b.formulas, &b.symbols, true);
    let Consistency::Consistent(w) = c else { panic!("expected consistent") };
    let first = enc.decode(&w.steps().next().unwrap().clone());
    assert!(first.contains(&("Regulator_Mode".to_string(), "INIT".to_string())));
}

#[test]
fn contradictory_extra_requirement() {
    let b = common::build(&["corpus.txt"]);
    let vars: BTreeSet<String> = common::config().partition.declared().cloned().collect();
    let mut fs = b.formulas.clone();
    fs.push(parse_with_vars("G((Regulator_Mode = INIT) => (Output_Regulator_Status = On))", &vars).unwrap());
    let (c, _) = check_consistency(&fs, &b.symbols, true);
    assert_eq!(c, Consistency::Inconsistent);
}

#[test]
fn sampled_model_traces_satisfy_theorem() {
    use rand::{Rng, SeedableRng};
    let b = common::build(&["corpus.txt"]);
    let theorem = parse(THEOREM).unwrap();
    let (k, _, enc) = build_kripke(&b.model, std::slice::from_ref(&theorem), &KripkeOptions::default()).unwrap();
    let a = ltl_to_buchi(&enc[0]);
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let mut path = vec![k.initial[rng.gen_range(0..k.initial.len())]];
        let loop_at = loop {
            let s = *path.last().unwrap();
            let t = k.succ[s][rng.gen_range(0..k.succ[s].len())];
            if let Some(i) = path.iter().position(|&x| x == t) {
                break i;
            }
            path.push(t);
        };
        let labels: Vec<Valuation> = path.iter().map(|&s| k.label(s)).collect();
        let lasso = Lasso { prefix: labels[..loop_at].to_vec(), cycle: labels[loop_at..].to_vec() };
        assert!(satisfies(&enc[0], &lasso.prefix, &lasso.cycle));
        assert!(accepts(&a, &lasso.prefix, &lasso.cycle));
    }
}
