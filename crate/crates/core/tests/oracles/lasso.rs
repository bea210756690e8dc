use proptest::prelude::*;
use reqlift_core::automata::Valuation;
use reqlift_core::ltl::Ltl;

/// Direct lasso semantics, independent of the automaton construction.
pub fn holds_at(f: &Ltl, word: &[Valuation], loop_start: usize, i: usize) -> bool {
    let n = word.len();
    let next = |i: usize| if i + 1 == n { loop_start } else { i + 1 };
    // Positions reachable from i, each visited once.
    let future = |i: usize| {
        let mut out = vec![];
        let mut j = i;
        loop {
            if out.contains(&j) {
                break;
            }
            out.push(j);
            j = next(j);
        }
        out
    };
    match f {
        Ltl::True => true,
        Ltl::False => false,
        Ltl::Prop(p) => word[i].get(p).copied().unwrap_or(false),
        Ltl::Not(a) => !holds_at(a, word, loop_start, i),
        Ltl::And(cs) => cs.iter().all(|c| holds_at(c, word, loop_start, i)),
        Ltl::Or(cs) => cs.iter().any(|c| holds_at(c, word, loop_start, i)),
        Ltl::Implies(a, b) => !holds_at(a, word, loop_start, i) || holds_at(b, word, loop_start, i),
        Ltl::Next(a) => holds_at(a, word, loop_start, next(i)),
        Ltl::Globally(a) => future(i).into_iter().all(|j| holds_at(a, word, loop_start, j)),
        Ltl::Finally(a) => future(i).into_iter().any(|j| holds_at(a, word, loop_start, j)),
        Ltl::Atom(_) => unreachable!(),
    }
}

pub fn satisfies(f: &Ltl, prefix: &[Valuation], cycle: &[Valuation]) -> bool {
    let word: Vec<Valuation> = prefix.iter().chain(cycle).cloned().collect();
    holds_at(f, &word, prefix.len(), 0)
}

pub const ATOMS: [&str; 3] = ["p", "q", "r"];

pub fn letters() -> Vec<Valuation> {
    (0..8u8).map(|c| ATOMS.iter().enumerate().map(|(j, a)| (a.to_string(), c >> j & 1 == 1)).collect()).collect()
}

/// Every lasso with total length at most `max`.
pub fn all_lassos(max: usize) -> Vec<(Vec<Valuation>, Vec<Valuation>)> {
    let ls = letters();
    let mut out = vec![];
    for total in 1..=max {
        let count = ls.len().pow(total as u32);
        for code in 0..count {
            let mut c = code;
            let word: Vec<Valuation> = (0..total)
                .map(|_| {
                    let l = ls[c % ls.len()].clone();
                    c /= ls.len();
                    l
                })
                .collect();
            for split in 0..total {
                out.push((word[..split].to_vec(), word[split..].to_vec()));
            }
        }
    }
    out
}

pub fn arb_formula() -> impl Strategy<Value = Ltl> {
    let leaf = prop_oneof![Just(Ltl::prop("p")), Just(Ltl::prop("q")), Just(Ltl::prop("r")), Just(Ltl::True)];
    leaf.prop_recursive(3, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Ltl::not),
            inner.clone().prop_map(Ltl::next),
            inner.clone().prop_map(Ltl::globally),
            inner.clone().prop_map(Ltl::finally),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::and(vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::or(vec![a, b])),
            (inner.clone(), inner).prop_map(|(a, b)| Ltl::implies(a, b)),
        ]
    })
    .prop_filter("at most six operators", |f| f.subtrees().iter().filter(|s| !s.children().is_empty()).count() <= 6)
}
