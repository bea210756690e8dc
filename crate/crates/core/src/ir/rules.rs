use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::frontend::{Mention, TypedDependency};

use super::{IRTable, IrError, Quantifier, TermType, SINGLE_VALUED};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    /// Matches a mention by lemma, case-insensitively.
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    Type(TermType, Term),
    Lemma(Term, String),
    Tagged(Term, String),
    Negated(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Td { relation: String, governor: Term, dependent: Term },
    Guard(Guard),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// `implies(x, y)`: `y` gains `impliedBy: x`.
    Implies(Term, Term),
    Rel(String, Term, Term),
    Tag(Term, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRule {
    pub text: String,
    pub patterns: Vec<Pattern>,
    pub actions: Vec<Action>,
}

impl fmt::Display for TypeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub fn default_rules() -> Vec<TypeRule> {
    parse_rules(include_str!("../../../../data/rules.txt")).expect("shipped rule file is well-formed")
}

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts
}

fn call(item: &str) -> Result<(&str, Vec<&str>), String> {
    let open = item.find('(').ok_or_else(|| format!("expected `name(args)` in {item:?}"))?;
    let inner = item[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| format!("missing `)` in {item:?}"))?;
    let name = item[..open].trim();
    if name.is_empty() {
        return Err(format!("missing name in {item:?}"));
    }
    Ok((name, inner.split(',').map(str::trim).collect()))
}

fn term(s: &str) -> Result<Term, String> {
    match s.strip_prefix('?') {
        Some(v) if !v.is_empty() => Ok(Term::Var(v.to_string())),
        Some(_) => Err("empty metavariable".into()),
        None if !s.is_empty() => Ok(Term::Word(s.to_string())),
        None => Err("empty argument".into()),
    }
}

fn var_term(s: &str) -> Result<Term, String> {
    match term(s)? {
        Term::Var(v) => Ok(Term::Var(v)),
        Term::Word(w) => Err(format!("expected a metavariable, found {w:?}")),
    }
}

fn term_type(name: &str) -> Option<TermType> {
    match name {
        "entity" => Some(TermType::Entity),
        "event" => Some(TermType::Event),
        "numeric" => Some(TermType::Numeric),
        "predicate" => Some(TermType::Predicate),
        _ => None,
    }
}

fn parse_pattern(item: &str) -> Result<Pattern, String> {
    let (name, args) = call(item)?;
    if let Some(tt) = term_type(name) {
        let [x] = args.as_slice() else { return Err(format!("{name} takes one argument")) };
        return Ok(Pattern::Guard(Guard::Type(tt, var_term(x)?)));
    }
    match (name, args.as_slice()) {
        ("lemma", [x, w]) => Ok(Pattern::Guard(Guard::Lemma(var_term(x)?, w.to_string()))),
        ("tagged", [x, t]) => Ok(Pattern::Guard(Guard::Tagged(var_term(x)?, t.to_string()))),
        ("negated", [x]) => Ok(Pattern::Guard(Guard::Negated(var_term(x)?))),
        ("lemma" | "tagged" | "negated", _) => Err(format!("wrong arity for guard {name}")),
        (_, [g, d]) => Ok(Pattern::Td { relation: name.to_string(), governor: term(g)?, dependent: term(d)? }),
        _ => Err(format!("dependency pattern {name} takes two arguments")),
    }
}

fn parse_action(item: &str) -> Result<Action, String> {
    let (name, args) = call(item)?;
    match (name, args.as_slice()) {
        ("implies", [x, y]) => Ok(Action::Implies(var_term(x)?, var_term(y)?)),
        ("rel", [r, x, y]) if !r.is_empty() => Ok(Action::Rel(r.to_string(), var_term(x)?, var_term(y)?)),
        ("tag", [x, t]) if !t.is_empty() => Ok(Action::Tag(var_term(x)?, t.to_string())),
        _ => Err(format!("unknown action {item:?}")),
    }
}

fn vars_of(t: &Term, out: &mut BTreeSet<String>) {
    if let Term::Var(v) = t {
        out.insert(v.clone());
    }
}

pub fn parse_rule(line: &str) -> Result<TypeRule, String> {
    let halves = split_top(line, ':');
    if halves.len() != 2 {
        return Err("expected exactly one top-level `:`".into());
    }
    let mut patterns = Vec::new();
    for item in split_top(halves[0], '&') {
        patterns.push(parse_pattern(item)?);
    }
    let mut actions = Vec::new();
    for item in split_top(halves[1], ',') {
        actions.push(parse_action(item)?);
    }
    // dependency patterns bind; guards and actions only read
    patterns.sort_by_key(|p| matches!(p, Pattern::Guard(_)));
    let mut bound = BTreeSet::new();
    for p in &patterns {
        if let Pattern::Td { governor, dependent, .. } = p {
            vars_of(governor, &mut bound);
            vars_of(dependent, &mut bound);
        }
    }
    if !patterns.iter().any(|p| matches!(p, Pattern::Td { .. })) {
        return Err("a rule needs at least one dependency pattern".into());
    }
    let mut used = BTreeSet::new();
    for p in &patterns {
        if let Pattern::Guard(g) = p {
            match g {
                Guard::Type(_, t) | Guard::Lemma(t, _) | Guard::Tagged(t, _) | Guard::Negated(t) => vars_of(t, &mut used),
            }
        }
    }
    for a in &actions {
        match a {
            Action::Implies(x, y) | Action::Rel(_, x, y) => {
                vars_of(x, &mut used);
                vars_of(y, &mut used);
            }
            Action::Tag(x, _) => vars_of(x, &mut used),
        }
    }
    if let Some(v) = used.difference(&bound).next() {
        return Err(format!("metavariable ?{v} is not bound by a dependency pattern"));
    }
    Ok(TypeRule { text: line.trim().to_string(), patterns, actions })
}

/// One rule per line; `#` starts a comment.
pub fn parse_rules(text: &str) -> Result<Vec<TypeRule>, IrError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        rules.push(parse_rule(line).map_err(|message| IrError::Rule { line: i + 1, message })?);
    }
    Ok(rules)
}

type Binding = BTreeMap<String, Mention>;

fn unify(t: &Term, m: &Mention, b: &mut Binding) -> bool {
    match t {
        Term::Word(w) => m.lemma.eq_ignore_ascii_case(w),
        Term::Var(v) => match b.get(v) {
            Some(existing) => existing == m,
            None => {
                b.insert(v.clone(), m.clone());
                true
            }
        },
    }
}

fn guard_holds(g: &Guard, b: &Binding, table: &IRTable) -> bool {
    let entry = |t: &Term| match t {
        Term::Var(v) => b.get(v).and_then(|m| table.get(m)),
        Term::Word(_) => None,
    };
    match g {
        Guard::Type(tt, t) => entry(t).is_some_and(|e| e.term_type == *tt),
        Guard::Lemma(t, w) => entry(t).is_some_and(|e| e.mention.lemma.eq_ignore_ascii_case(w)),
        Guard::Tagged(t, tag) => entry(t).is_some_and(|e| e.has_tag(tag)),
        Guard::Negated(t) => entry(t).is_some_and(|e| e.negated),
    }
}

fn matches(rule: &TypeRule, tds: &[TypedDependency], table: &IRTable) -> Vec<(Binding, Vec<usize>)> {
    let mut partial: Vec<(Binding, Vec<usize>)> = vec![(Binding::new(), Vec::new())];
    for p in &rule.patterns {
        let mut next = Vec::new();
        for (b, used) in partial {
            match p {
                Pattern::Td { relation, governor, dependent } => {
                    for (i, td) in tds.iter().enumerate() {
                        if td.relation != *relation {
                            continue;
                        }
                        let mut nb = b.clone();
                        if unify(governor, &td.governor, &mut nb) && unify(dependent, &td.dependent, &mut nb) {
                            let mut nu = used.clone();
                            nu.push(i);
                            next.push((nb, nu));
                        }
                    }
                }
                Pattern::Guard(g) => {
                    if guard_holds(g, &b, table) {
                        next.push((b, used));
                    }
                }
            }
        }
        partial = next;
    }
    partial
}

fn resolve<'b>(t: &Term, b: &'b Binding) -> &'b Mention {
    match t {
        Term::Var(v) => &b[v],
        Term::Word(_) => unreachable!("actions only take metavariables"),
    }
}

fn add_relation(
    table: &mut IRTable,
    origin: &mut HashMap<(usize, String), usize>,
    rules: &[TypeRule],
    ri: usize,
    rel: &str,
    x: &Mention,
    y: &Mention,
) -> Result<(), IrError> {
    let entry = table.entries.get_mut(&x.position).expect("bound mentions are seeded");
    let list = entry.relations.entry(rel.to_string()).or_default();
    if list.contains(y) {
        return Ok(());
    }
    if SINGLE_VALUED.contains(&rel) {
        if let Some(existing) = list.first() {
            let first = origin.get(&(x.position, rel.to_string())).copied().unwrap_or(ri);
            return Err(IrError::Conflict {
                entry: x.clone(),
                relation: rel.to_string(),
                existing: existing.clone(),
                new: y.clone(),
                first_rule: rules[first].text.clone(),
                second_rule: rules[ri].text.clone(),
            });
        }
        origin.insert((x.position, rel.to_string()), ri);
    }
    list.push(y.clone());
    Ok(())
}

fn apply_tag(table: &mut IRTable, x: &Mention, tag: &str) {
    let e = table.entries.get_mut(&x.position).expect("bound mentions are seeded");
    if let Some(tt) = term_type(tag) {
        e.term_type = tt;
        return;
    }
    match tag {
        "negated" => e.negated = true,
        "unique" => e.quantifier = Quantifier::Unique,
        "all" => e.quantifier = Quantifier::All,
        "exists" => e.quantifier = Quantifier::Exists,
        t => match t.strip_prefix("temporal:") {
            Some(v) => e.temporal = Some(v.to_string()),
            None => {
                e.tags.insert(t.to_string());
            }
        },
    }
}

/// Applies the rules in order; every match of every rule fires.
pub fn apply_type_rules(tds: &[TypedDependency], rules: &[TypeRule]) -> Result<IRTable, IrError> {
    let mut table = IRTable::seed(tds);
    let mut consumed = vec![false; tds.len()];
    let mut origin = HashMap::new();
    for (ri, rule) in rules.iter().enumerate() {
        for (b, used) in matches(rule, tds, &table) {
            for i in used {
                consumed[i] = true;
            }
            for action in &rule.actions {
                match action {
                    Action::Implies(x, y) => {
                        let (x, y) = (resolve(x, &b).clone(), resolve(y, &b).clone());
                        add_relation(&mut table, &mut origin, rules, ri, "impliedBy", &y, &x)?;
                    }
                    Action::Rel(rel, x, y) => {
                        let (x, y) = (resolve(x, &b).clone(), resolve(y, &b).clone());
                        add_relation(&mut table, &mut origin, rules, ri, rel, &x, &y)?;
                    }
                    Action::Tag(x, tag) => {
                        let x = resolve(x, &b).clone();
                        apply_tag(&mut table, &x, tag);
                    }
                }
            }
        }
    }
    for e in table.entries.values_mut() {
        let plain = matches!(e.term_type, TermType::Entity | TermType::Numeric)
            && !e.has_tag("function")
            && e.rel("and").is_empty()
            && e.rel("or").is_empty();
        if plain && e.quantifier == Quantifier::None {
            e.quantifier = Quantifier::Unique;
        }
    }
    for (td, used) in tds.iter().zip(consumed) {
        if !used {
            log::debug!("no type rule matched {td}");
            table.unmatched.push(td.clone());
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Mention {
        Mention::parse(s).unwrap()
    }

    fn td(s: &str) -> TypedDependency {
        TypedDependency::parse(s).unwrap()
    }

    #[test]
    fn implies_adds_implied_by() {
        let rules = parse_rules("prep_upon(?g,?d): implies(?d,?g)").unwrap();
        let table = apply_type_rules(&[td("prep_upon(entering-17, set-4)")], &rules).unwrap();
        assert_eq!(table.get(&m("entering-17")).unwrap().rel("impliedBy"), &[m("set-4")]);
    }

    #[test]
    fn of_relation() {
        let table = apply_type_rules(
            &[td("prep_of(Status_attribute-3, Lower_Desired_Temperature-6)")],
            &default_rules(),
        )
        .unwrap();
        let e = table.get(&m("Status_attribute-3")).unwrap();
        assert_eq!(e.rel("of"), &[m("Lower_Desired_Temperature-6")]);
        assert_eq!(e.quantifier, Quantifier::Unique);
        assert_eq!(e.to_string(), "Status_attribute-3: {entity | unique | of: [Lower_Desired_Temperature-6]}");
    }

    #[test]
    fn empty_input() {
        let table = apply_type_rules(&[], &default_rules()).unwrap();
        assert!(table.is_empty());
    }

    #[test]
    fn guard_requires_event() {
        let rules = parse_rules("nsubj(?g,?d) & event(?g): rel(agent,?g,?d)").unwrap();
        let table = apply_type_rules(&[td("nsubj(equals-3, Mode-2)"), td("dobj(equals-3, INIT-4)")], &rules).unwrap();
        assert_eq!(table.get(&m("equals-3")).unwrap().rel("agent"), &[m("Mode-2")]);
        let rules = parse_rules("nsubj(?g,?d) & predicate(?g): rel(agent,?g,?d)").unwrap();
        let table = apply_type_rules(&[td("nsubj(equals-3, Mode-2)")], &rules).unwrap();
        assert!(table.get(&m("equals-3")).unwrap().rel("agent").is_empty());
        assert_eq!(table.unmatched.len(), 1);
    }

    #[test]
    fn conflict_names_both_rules() {
        let rules = parse_rules("nsubjpass(?g,?d): rel(object,?g,?d)\ndobj(?g,?d): rel(object,?g,?d)").unwrap();
        let err = apply_type_rules(&[td("nsubjpass(set-4, a-2)"), td("dobj(set-4, b-6)")], &rules).unwrap_err();
        match err {
            IrError::Conflict { first_rule, second_rule, .. } => {
                assert_eq!(first_rule, "nsubjpass(?g,?d): rel(object,?g,?d)");
                assert_eq!(second_rule, "dobj(?g,?d): rel(object,?g,?d)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unbound_metavariable() {
        assert!(matches!(parse_rules("nsubj(?g,?d): rel(agent,?g,?x)"), Err(IrError::Rule { line: 1, .. })));
        assert!(parse_rules("event(?g): tag(?g,modal)").is_err());
        assert!(parse_rules("nsubj(?g,?d) rel(agent,?g,?d)").is_err());
    }

    #[test]
    fn deterministic() {
        let tds = [td("advcl(set-14, is-7)"), td("mark(is-7, If-1)"), td("nsubjpass(set-14, RIF-11)")];
        let a = apply_type_rules(&tds, &default_rules()).unwrap();
        let b = apply_type_rules(&tds, &default_rules()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get(&m("set-14")).unwrap().rel("impliedBy"), &[m("is-7")]);
        assert!(a.get(&m("If-1")).unwrap().has_tag("function"));
    }
}
