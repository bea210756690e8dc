use reqlift_core::ltl::Ltl;

/// Condition clauses of "If <cond>, <consequence>." in order.
pub fn clauses(text: &str) -> Vec<String> {
    let Some(rest) = text.strip_prefix("If ") else { return vec![] };
    let cond = &rest[..rest.rfind(", the ").unwrap()];
    let mut out = vec![];
    let mut cur = String::new();
    for w in cond.split(' ') {
        let w = w.trim_end_matches(',');
        if (w == "and" || w == "or") && cur.contains(" is ") || (w == "and" || w == "or") && cur.contains(" equals ") {
            out.push(std::mem::take(&mut cur));
            continue;
        }
        cur.push(' ');
        cur.push_str(w);
        cur.push(' ');
    }
    out.push(cur);
    out
}

pub fn guard_children(guard: &Ltl) -> Vec<Ltl> {
    match guard {
        Ltl::And(cs) | Ltl::Or(cs) => cs.clone(),
        other => vec![other.clone()],
    }
}

pub fn rebuild(guard: &Ltl, kids: Vec<Ltl>) -> Ltl {
    match guard {
        Ltl::And(_) => Ltl::and(kids),
        Ltl::Or(_) => Ltl::or(kids),
        _ => kids.into_iter().next().unwrap(),
    }
}

pub fn and_to_or(f: &Ltl) -> Ltl {
    match f {
        Ltl::And(cs) => Ltl::or(cs.iter().map(and_to_or).collect()),
        Ltl::Or(cs) => Ltl::or(cs.iter().map(and_to_or).collect()),
        Ltl::Not(a) => Ltl::not(and_to_or(a)),
        Ltl::Implies(a, b) => Ltl::implies(and_to_or(a), and_to_or(b)),
        Ltl::Globally(a) => Ltl::globally(and_to_or(a)),
        Ltl::Next(a) => Ltl::next(and_to_or(a)),
        other => other.clone(),
    }
}

/// Negates the guard atoms whose clause uses "is".
pub fn is_to_is_not(text: &str, f: &Ltl) -> Ltl {
    let Ltl::Globally(body) = f else { return f.clone() };
    let Ltl::Implies(guard, rhs) = &**body else { return f.clone() };
    let flags: Vec<bool> = clauses(text).iter().map(|c| c.contains(" is ")).collect();
    let kids = guard_children(guard);
    assert_eq!(kids.len(), flags.len(), "{text}");
    let kids = kids
        .into_iter()
        .zip(flags)
        .map(|(k, flip)| match (k, flip) {
            (Ltl::Not(a), true) => *a,
            (k, true) => Ltl::not(k),
            (k, false) => k,
        })
        .collect();
    Ltl::globally(Ltl::implies(rebuild(guard, kids), (**rhs).clone()))
}
