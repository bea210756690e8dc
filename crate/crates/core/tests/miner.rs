mod common;

use reqlift_core::gr1::{check_realizability, Realizability, SolveOptions};
use reqlift_core::miner::{english, enumerate_candidates, mine, MineError, MiningStatus, Template};

fn counterstrategy() -> Box<reqlift_core::gr1::Counterstrategy> {
    match check_realizability(&common::gr1_spec(), &SolveOptions::default()).unwrap() {
        Realizability::Unrealizable(cs) => cs,
        Realizability::Realizable(_) => panic!("expected unrealizable"),
    }
}

#[test]
fn top_candidate_is_the_mined_assumption() {
    let cands = enumerate_candidates(&counterstrategy(), &Template::ALL);
    assert!(!cands.is_empty());
    assert_eq!(cands[0].text, "G !(Regulator_Status=true & Regulator_Init_Timeout=true)");
    assert_eq!(cands[0].assumption, common::mined_assumption());
    assert_eq!(
        cands[0].english,
        "Globally, it is never the case that Regulator Status is True and Regulator Init Timeout is True."
    );
    assert_eq!(cands[0].rank, 1);
}

#[test]
fn candidates_are_unique_and_deterministic() {
    let cs = counterstrategy();
    let a = enumerate_candidates(&cs, &Template::ALL);
    let b = enumerate_candidates(&counterstrategy(), &Template::ALL);
    assert_eq!(a, b);
    let texts: std::collections::BTreeSet<_> = a.iter().map(|c| c.text.clone()).collect();
    assert_eq!(texts.len(), a.len());
}

#[test]
fn empty_template_set() {
    assert!(enumerate_candidates(&counterstrategy(), &[]).is_empty());
}

#[test]
fn candidates_only_use_exhibited_polarities() {
    let cs = counterstrategy();
    let (nodes, _, _) = cs.plays();
    let shown: Vec<_> = nodes.iter().map(|(_, p)| cs.spec.valuation(cs.arena.positions[*p])).collect();
    assert!(shown.iter().all(|v| !v["Regulator_Internal_Failure"]));
    for c in enumerate_candidates(&cs, &Template::ALL) {
        for a in &c.atoms {
            if a.subject == "Regulator_Internal_Failure" {
                assert_eq!(a.value, "FALSE", "{}", c.text);
            }
        }
    }
}

#[test]
fn accepted_assumption_kills_the_old_counterstrategy() {
    let cs = counterstrategy();
    let top = enumerate_candidates(&cs, &Template::ALL).remove(0);
    let mut spec = common::gr1_spec();
    spec.add_assumption("a", &top.assumption).unwrap();
    let guard = spec.beta_e.last().unwrap();
    let (nodes, succ, initial) = cs.plays();
    // Every play of the old counterstrategy reaches a position breaking it.
    let mut stack = initial.clone();
    let mut seen = vec![false; nodes.len()];
    while let Some(n) = stack.pop() {
        if seen[n] {
            continue;
        }
        seen[n] = true;
        if !guard.expr.eval(cs.arena.positions[nodes[n].1], 0) {
            continue;
        }
        assert!(!succ[n].is_empty(), "play ends without breaking the assumption");
        stack.extend(&succ[n]);
    }
}

#[test]
fn always_accept_reaches_realizability() {
    let s = mine(&common::gr1_spec(), &Template::ALL, &SolveOptions::default(), |_| true).unwrap();
    assert_eq!(s.status, MiningStatus::Realizable);
    assert_eq!(s.accepted.len(), 1);
    assert_eq!(s.accepted[0].assumption, common::mined_assumption());
    assert_eq!(s.iterations, 1);
}

#[test]
fn always_reject_exhausts() {
    let mut asked = 0;
    let s = mine(&common::gr1_spec(), &Template::ALL, &SolveOptions::default(), |_| {
        asked += 1;
        false
    })
    .unwrap();
    assert_eq!(s.status, MiningStatus::Exhausted);
    assert!(s.accepted.is_empty());
    assert_eq!(s.rejected.len(), asked);
}

#[test]
fn realizable_spec_is_a_no_op() {
    let r = mine(&common::gr1_spec_with_assumption(), &Template::ALL, &SolveOptions::default(), |_| true);
    assert!(matches!(r, Err(MineError::NoOp(_))));
}

#[test]
fn english_connectives() {
    let f = reqlift_core::ltl::parse("G((Regulator_Init_Timeout = TRUE) => X(NOT(Regulator_Internal_Failure = TRUE)))").unwrap();
    assert_eq!(
        english(&f),
        "Globally, whenever Regulator Init Timeout is True, in the next step it is not the case that Regulator Internal Failure is True."
    );
    let g = reqlift_core::ltl::parse("G(F(NOT(Regulator_Init_Timeout = TRUE)))").unwrap();
    assert_eq!(english(&g), "Globally, eventually it is not the case that Regulator Init Timeout is True.");
}

