mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use reqlift_core::corpus::load_golden;
use reqlift_core::ltl::{parse, Atom, Ltl, Operand, VarRef};
use reqlift_core::metrics::{
    automation_score, fmeasure, subformulas, tallies, tokenize, typed_levenshtein, FormulaToken, TokenKind,
};

fn golden() -> Vec<Ltl> {
    let vars = common::config().partition.declared().cloned().collect();
    load_golden(format!("{}/golden.ltl", common::DATA), &vars).unwrap()
}

fn chars_lev(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return a.len() + b.len();
    }
    if let Some(&d) = memo.get(&(a.len(), b.len())) {
        return d;
    }
    let sub = chars_lev(&a[1..], &b[1..], memo) + (a[0] != b[0]) as usize;
    let d = sub.min(chars_lev(&a[1..], b, memo) + 1).min(chars_lev(a, &b[1..], memo) + 1);
    memo.insert((a.len(), b.len()), d);
    d
}

fn cost(x: &FormulaToken, y: &FormulaToken) -> f64 {
    use TokenKind::*;
    match (x.kind, y.kind) {
        (VariableToken, VariableToken) => 0.0,
        (LogicalSymbol, LogicalSymbol) => if x.text == y.text { 0.0 } else { 1.0 },
        (StringToken, StringToken) => {
            let (a, b): (Vec<char>, Vec<char>) = (x.text.chars().collect(), y.text.chars().collect());
            let n = a.len().max(b.len());
            if n == 0 { 0.0 } else { chars_lev(&a, &b, &mut HashMap::new()) as f64 / n as f64 }
        }
        _ => 1.0,
    }
}

/// Recursive form of the recurrence, memoized on suffix lengths.
fn oracle(a: &[FormulaToken], b: &[FormulaToken], memo: &mut HashMap<(usize, usize), f64>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return (a.len() + b.len()) as f64;
    }
    if let Some(&d) = memo.get(&(a.len(), b.len())) {
        return d;
    }
    let d = (oracle(&a[1..], &b[1..], memo) + cost(&a[0], &b[0]))
        .min(oracle(&a[1..], b, memo) + 1.0)
        .min(oracle(a, &b[1..], memo) + 1.0);
    memo.insert((a.len(), b.len()), d);
    d
}

fn oracle_f(ground: &Ltl, generated: &Ltl) -> (f64, f64) {
    let sim = |x: &Ltl, y: &Ltl| {
        let (tx, ty) = (tokenize(x), tokenize(y));
        1.0 - oracle(&tx, &ty, &mut HashMap::new()) / tx.len().max(ty.len()) as f64
    };
    let mut g = vec![];
    walk(ground, &mut g);
    let mut h = vec![];
    walk(generated, &mut h);
    let p = h.iter().map(|x| g.iter().map(|y| sim(x, y)).fold(0.0, f64::max)).sum::<f64>() / h.len() as f64;
    let r = g.iter().map(|y| h.iter().map(|x| sim(y, x)).fold(0.0, f64::max)).sum::<f64>() / g.len() as f64;
    (p, r)
}

fn walk(f: &Ltl, out: &mut Vec<Ltl>) {
    out.push(f.clone());
    for c in f.children() {
        walk(c, out);
    }
}

fn toks(s: &str) -> Vec<FormulaToken> {
    tokenize(&parse(s).unwrap())
}

#[test]
fn distance_examples() {
    let f = &golden()[9];
    assert_eq!(typed_levenshtein(&tokenize(f), &tokenize(f)), 0.0);
    assert_eq!(typed_levenshtein(&toks("p = TRUE AND q = TRUE"), &toks("p = TRUE OR q = TRUE")), 1.0);
    assert_eq!(typed_levenshtein(&toks("x = Invalid"), &toks("y = Invalid")), 0.0);
}

#[test]
fn golden_formulas_score_one_against_themselves() {
    for f in golden() {
        let r = fmeasure(&f, &f);
        assert_eq!((r.precision, r.recall, r.f_measure), (1.0, 1.0, 1.0), "{f}");
    }
}

#[test]
fn subformula_counts() {
    let p = parse("p").unwrap();
    assert_eq!(subformulas(&p), vec![p.clone()]);
    assert_eq!(subformulas(&parse("G(p => q)").unwrap()).len(), 4);
    let g = golden();
    assert_eq!(subformulas(&g[12]).len(), 7);
    for f in &g {
        let mut w = vec![];
        walk(f, &mut w);
        assert_eq!(subformulas(f), w);
    }
}

#[test]
fn missing_conjunct_lowers_recall() {
    let ground = golden()[9].clone();
    let Ltl::Globally(body) = &ground else { panic!() };
    let Ltl::Implies(guard, rhs) = &**body else { panic!() };
    let Ltl::And(cs) = &**guard else { panic!() };
    let generated = Ltl::globally(Ltl::implies(Ltl::and(cs[..2].to_vec()), (**rhs).clone()));
    let r = fmeasure(&ground, &generated);
    let (p, rc) = oracle_f(&ground, &generated);
    assert!((r.precision - p).abs() < 1e-12 && (r.recall - rc).abs() < 1e-12);
    assert!(r.recall < 1.0);
    assert!(r.precision > r.recall);
    // The root, the implication and the shortened conjunction lack an exact partner.
    assert_eq!(r.pairs.iter().filter(|m| m.similarity < 1.0).count(), 3);
}

#[test]
fn disjoint_atoms_score_low() {
    let r = fmeasure(&parse("G p").unwrap(), &parse("F q").unwrap());
    assert!(r.f_measure < 0.5, "{r:?}");
    let (p, rc) = oracle_f(&parse("G p").unwrap(), &parse("F q").unwrap());
    assert_eq!((r.precision, r.recall), (p, rc));
}

#[test]
fn renaming_variables_keeps_the_score() {
    for f in golden() {
        let rename = |v: &VarRef| VarRef::new(format!("{}_renamed", v.root()));
        let renamed = f.map_leaves(&mut |leaf| match leaf {
            Ltl::Atom(a) => Ltl::atom(Atom {
                lhs: rename(&a.lhs),
                op: a.op,
                rhs: match &a.rhs {
                    Operand::Var(v) => Operand::Var(rename(v)),
                    other => other.clone(),
                },
            }),
            other => other.clone(),
        });
        assert_ne!(renamed, f);
        assert_eq!(fmeasure(&f, &renamed).f_measure, 1.0, "{f}");
    }
}

#[test]
fn automation_scores() {
    assert_eq!(automation_score(&tallies(39, 2, 1)).unwrap().round(), 95.0);
    assert_eq!(automation_score(&tallies(24, 8, 4)).unwrap().round(), 78.0);
    assert_eq!(automation_score(&tallies(5, 0, 0)).unwrap(), 100.0);
    assert!(automation_score(&[]).is_err());
}

fn arb_token() -> impl Strategy<Value = FormulaToken> {
    let kind = prop_oneof![
        Just(TokenKind::LogicalSymbol),
        Just(TokenKind::StringToken),
        Just(TokenKind::VariableToken)
    ];
    (kind, "[abc]{0,4}").prop_map(|(kind, text)| FormulaToken { kind, text })
}

proptest! {
    #[test]
    fn distance_matches_recurrence(a in prop::collection::vec(arb_token(), 0..7), b in prop::collection::vec(arb_token(), 0..7)) {
        let d = typed_levenshtein(&a, &b);
        prop_assert!((d - oracle(&a, &b, &mut HashMap::new())).abs() < 1e-9);
        prop_assert!((d - typed_levenshtein(&b, &a)).abs() < 1e-9);
        prop_assert_eq!(typed_levenshtein(&a, &a), 0.0);
    }

    #[test]
    fn triangle_inequality(
        a in prop::collection::vec(arb_token(), 0..6),
        b in prop::collection::vec(arb_token(), 0..6),
        c in prop::collection::vec(arb_token(), 0..6),
    ) {
        prop_assert!(typed_levenshtein(&a, &c) <= typed_levenshtein(&a, &b) + typed_levenshtein(&b, &c) + 1e-9);
    }
}
