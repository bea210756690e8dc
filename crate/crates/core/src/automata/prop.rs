//! Propositional formulas: `Ltl` values built only from `Prop`, constants and
//! boolean connectives.

use std::collections::BTreeMap;

use crate::ltl::Ltl;

pub type Valuation = BTreeMap<String, bool>;

pub fn eval(f: &Ltl, lookup: &impl Fn(&str) -> Option<bool>) -> Option<bool> {
    Some(match f {
        Ltl::True => true,
        Ltl::False => false,
        Ltl::Prop(p) => lookup(p)?,
        Ltl::Not(a) => !eval(a, lookup)?,
        Ltl::And(cs) => {
            for c in cs {
                if !eval(c, lookup)? {
                    return Some(false);
                }
            }
            true
        }
        Ltl::Or(cs) => {
            for c in cs {
                if eval(c, lookup)? {
                    return Some(true);
                }
            }
            false
        }
        Ltl::Implies(a, b) => !eval(a, lookup)? || eval(b, lookup)?,
        _ => return None,
    })
}

pub fn eval_in(f: &Ltl, v: &Valuation) -> Option<bool> {
    eval(f, &|p| v.get(p).copied())
}

/// Substitutes known values and folds constants.
pub fn reduce(f: &Ltl, v: &Valuation) -> Ltl {
    match f {
        Ltl::Prop(p) => match v.get(p) {
            Some(true) => Ltl::True,
            Some(false) => Ltl::False,
            None => f.clone(),
        },
        Ltl::Not(a) => match reduce(a, v) {
            Ltl::True => Ltl::False,
            Ltl::False => Ltl::True,
            Ltl::Not(x) => *x,
            x => Ltl::not(x),
        },
        Ltl::And(cs) => {
            let mut kids = Vec::with_capacity(cs.len());
            for c in cs {
                match reduce(c, v) {
                    Ltl::False => return Ltl::False,
                    Ltl::True => {}
                    x => kids.push(x),
                }
            }
            Ltl::and(kids)
        }
        Ltl::Or(cs) => {
            let mut kids = Vec::with_capacity(cs.len());
            for c in cs {
                match reduce(c, v) {
                    Ltl::True => return Ltl::True,
                    Ltl::False => {}
                    x => kids.push(x),
                }
            }
            Ltl::or(kids)
        }
        Ltl::Implies(a, b) => match reduce(a, v) {
            Ltl::False => Ltl::True,
            Ltl::True => reduce(b, v),
            a => match reduce(b, v) {
                Ltl::True => Ltl::True,
                Ltl::False => reduce(&Ltl::not(a), &Valuation::new()),
                b => Ltl::implies(a, b),
            },
        },
        other => other.clone(),
    }
}

fn first_prop(f: &Ltl) -> Option<&str> {
    match f {
        Ltl::Prop(p) => Some(p),
        _ => f.children().into_iter().find_map(first_prop),
    }
}

/// Literals forced by top-level conjuncts.
fn units(f: &Ltl, out: &mut Valuation) {
    match f {
        Ltl::Prop(p) => {
            out.insert(p.clone(), true);
        }
        Ltl::Not(a) => {
            if let Ltl::Prop(p) = &**a {
                out.insert(p.clone(), false);
            }
        }
        Ltl::And(cs) => cs.iter().for_each(|c| units(c, out)),
        _ => {}
    }
}

fn search(f: Ltl, assigned: &mut Valuation) -> bool {
    let mut f = f;
    loop {
        let mut u = Valuation::new();
        units(&f, &mut u);
        if u.is_empty() {
            break;
        }
        f = reduce(&f, &u);
        assigned.extend(u);
    }
    match f {
        Ltl::True => true,
        Ltl::False => false,
        _ => {
            let p = first_prop(&f).expect("non-constant formula has a proposition").to_string();
            for val in [true, false] {
                let mut attempt = assigned.clone();
                attempt.insert(p.clone(), val);
                let next = reduce(&f, &Valuation::from([(p.clone(), val)]));
                if search(next, &mut attempt) {
                    *assigned = attempt;
                    return true;
                }
            }
            false
        }
    }
}

/// A satisfying partial valuation, if any.
pub fn sat(f: &Ltl) -> Option<Valuation> {
    let mut v = Valuation::new();
    search(reduce(f, &Valuation::new()), &mut v).then_some(v)
}
