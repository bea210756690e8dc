//! Counterstrategy-guided assumption mining.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{Domain, ResourceError};
use crate::gr1::{check_realizability, violations, Arena, Conjunct, Counterstrategy, Expr, Gr1Spec, NonGr1Error, Realizability, SolveOptions};
use crate::ltl::{Atom, CmpOp, Ltl, Operand, Style, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Template {
    /// `G !(a & b)`
    GNotConj,
    /// `G (a -> X !b)`, `b` over inputs
    GImpliesNextNot,
    /// `G F !a`
    GfNot,
}

impl Template {
    pub const ALL: [Template; 3] = [Template::GNotConj, Template::GImpliesNextNot, Template::GfNot];

    pub fn arity(self) -> usize {
        match self {
            Template::GfNot => 1,
            _ => 2,
        }
    }
}

/// One value of a variable or comparison, e.g. `Regulator_Mode = INIT`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub subject: String,
    pub value: String,
    pub formula: Ltl,
    pub expr: Expr,
    pub input: bool,
}

#[derive(Debug, Clone)]
struct Unit {
    input: bool,
    literals: Vec<Literal>,
    bits: BTreeSet<String>,
}

impl Unit {
    fn value_at(&self, pos: u64) -> Option<usize> {
        self.literals.iter().position(|l| l.expr.eval(pos, 0))
    }
}

fn bit_literal(i: u32, b: bool) -> Expr {
    if b {
        Expr::Cur(i)
    } else {
        Expr::Not(Box::new(Expr::Cur(i)))
    }
}

/// Units in rank order: outputs before inputs, each in encoding order.
fn units(spec: &Gr1Spec) -> Vec<Unit> {
    let index = spec.prop_index();
    let n_in = spec.inputs.len() as u32;
    let enc = &spec.encoding;
    let mut out = Vec::new();
    for (v, d) in &enc.domains {
        let values: Vec<Value> = match d {
            Domain::Bool => vec![Value::Bool(true), Value::Bool(false)],
            Domain::Enum(vs) if enc.enums[v].bits.is_empty() => continue,
            Domain::Enum(vs) => vs.iter().map(|x| Value::Named(x.clone())).collect(),
            Domain::Numeric => continue,
        };
        let Some(bits) = values.first().and_then(|x| enc.value_bits(v, x)) else { continue };
        if bits.iter().any(|(b, _)| !index.contains_key(b)) {
            continue;
        }
        let input = bits.iter().all(|(b, _)| index[b] < n_in);
        let literals = values
            .iter()
            .map(|x| {
                let pattern = enc.value_bits(v, x).expect("value in domain");
                Literal {
                    subject: v.to_string(),
                    value: x.to_string(),
                    formula: Ltl::atom(Atom::eq_value(v.clone(), x.clone())),
                    expr: Expr::And(pattern.iter().map(|(b, on)| bit_literal(index[b], *on)).collect()),
                    input,
                }
            })
            .collect();
        out.push(Unit { input, literals, bits: bits.into_iter().map(|(b, _)| b).collect() });
    }
    for (a, name) in &enc.comparisons {
        let Some(&i) = index.get(name) else { continue };
        let lit = |b: bool| Literal {
            subject: a.to_string(),
            value: if b { "TRUE" } else { "FALSE" }.into(),
            formula: if b { Ltl::atom(a.clone()) } else { Ltl::not(Ltl::atom(a.clone())) },
            expr: bit_literal(i, b),
            input: i < n_in,
        };
        out.push(Unit {
            input: i < n_in,
            literals: vec![lit(true), lit(false)],
            bits: BTreeSet::from([name.clone()]),
        });
    }
    out.sort_by_key(|u| u.input);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub template: Template,
    pub atoms: Vec<Literal>,
    /// Typed assumption to add to the environment side.
    pub assumption: Ltl,
    pub text: String,
    pub english: String,
    pub rank: usize,
}

/// Plays of a counterstrategy as an explicit graph over (memory, position).
struct Plays {
    pos: Vec<u64>,
    succ: Vec<Vec<usize>>,
    initial: Vec<usize>,
}

impl Plays {
    fn reach(&self, from: &[usize], allowed: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.pos.len()];
        let mut stack: Vec<usize> = from.iter().copied().filter(|&n| allowed(n)).collect();
        for &n in &stack {
            seen[n] = true;
        }
        while let Some(n) = stack.pop() {
            for &m in &self.succ[n] {
                if !seen[m] && allowed(m) {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen
    }

    /// Some play stays inside `allowed` forever or ends inside it.
    fn escapes(&self, allowed: impl Fn(usize) -> bool + Copy) -> bool {
        let seen = self.reach(&self.initial, allowed);
        (0..self.pos.len()).any(|n| seen[n] && (self.succ[n].is_empty() || self.on_cycle(n, allowed)))
    }

    fn on_cycle(&self, n: usize, allowed: impl Fn(usize) -> bool + Copy) -> bool {
        let next: Vec<usize> = self.succ[n].iter().copied().filter(|&m| allowed(m)).collect();
        self.reach(&next, allowed)[n]
    }

    /// Every play reaches a position satisfying `hit`.
    fn always_reaches(&self, hit: impl Fn(usize) -> bool) -> bool {
        !self.escapes(|n| !hit(n))
    }

    /// Every play has consecutive positions satisfying `a` then `b`.
    fn always_reaches_step(&self, a: &Expr, b: &Expr) -> bool {
        // Product with a one-bit flag: "previous position satisfied a".
        let n = self.pos.len();
        let id = |node: usize, flag: bool| node * 2 + flag as usize;
        let flag = |node: usize| a.eval(self.pos[node], 0);
        let product = Plays {
            pos: (0..2 * n).map(|k| self.pos[k / 2]).collect(),
            succ: (0..2 * n).map(|k| self.succ[k / 2].iter().map(|&m| id(m, flag(k / 2))).collect()).collect(),
            initial: self.initial.iter().map(|&m| id(m, false)).collect(),
        };
        product.always_reaches(|k| k % 2 == 1 && b.eval(product.pos[k], 0))
    }

    /// Every play is infinite and eventually stays in `a`.
    fn eventually_always(&self, a: &Expr) -> bool {
        let seen = self.reach(&self.initial, |_| true);
        (0..self.pos.len()).all(|k| !seen[k] || (!self.succ[k].is_empty() && (a.eval(self.pos[k], 0) || !self.on_cycle(k, |_| true))))
    }
}

fn plays(cs: &Counterstrategy) -> Plays {
    let (nodes, succ, initial) = cs.plays();
    Plays { pos: nodes.iter().map(|(_, p)| cs.arena.positions[*p]).collect(), succ, initial }
}

/// Units whose value at some play position depended on the environment's choice.
fn varied(cs: &Counterstrategy, units: &[Unit]) -> BTreeSet<usize> {
    let (nodes, succ, initial) = cs.plays();
    let arena = &cs.arena;
    let mut alternatives: Vec<(usize, Vec<usize>)> = Vec::new();
    let first: Vec<usize> = arena.initial.iter().flat_map(|m| m.replies.clone()).collect();
    for &n in &initial {
        alternatives.push((nodes[n].1, first.clone()));
    }
    for (k, out) in succ.iter().enumerate() {
        let all: Vec<usize> = arena.moves[nodes[k].1].iter().flat_map(|m| m.replies.clone()).collect();
        for &m in out {
            alternatives.push((nodes[m].1, all.clone()));
        }
    }
    let mut out = BTreeSet::new();
    for (u, unit) in units.iter().enumerate() {
        let differs = alternatives.iter().any(|(p, alts)| {
            let here = unit.value_at(arena.positions[*p]);
            alts.iter().any(|&q| unit.value_at(arena.positions[q]) != here)
        });
        if differs {
            out.insert(u);
        }
    }
    out
}

/// Propositions of the system conjuncts behind the cheapest failed replies
/// at each deadlock of the counterstrategy's plays.
fn conflict_props(cs: &Counterstrategy) -> BTreeSet<String> {
    let spec = &cs.spec;
    let (nodes, succ, _) = cs.plays();
    let mut names = BTreeSet::new();
    for (k, out) in succ.iter().enumerate() {
        if !out.is_empty() {
            continue;
        }
        let (mem, p) = nodes[k];
        let pos = cs.arena.positions[p];
        let (next, _) = cs.next_move(&mem, spec.split(pos).1);
        let blamed: Vec<Vec<String>> =
            (0..1u64 << spec.outputs.len()).map(|o| violations(spec, Some(pos), spec.pack(next, o))).collect();
        let least = blamed.iter().map(Vec::len).min().unwrap_or(0);
        names.extend(blamed.into_iter().filter(|v| v.len() == least).flatten());
    }
    spec.conjuncts().chain(&spec.domain_s).filter(|c| names.contains(&c.name)).flat_map(|c| c.formula.props()).collect()
}

fn env_satisfiable(spec: &Gr1Spec, arena: &Arena, extra: &Conjunct) -> bool {
    let valid: Vec<u64> = (0..1u64 << spec.inputs.len()).filter(|&i| spec.domain_e.iter().all(|c| c.expr.eval(i, 0))).collect();
    let beta: Vec<&Conjunct> = spec.beta_e.iter().chain(std::iter::once(extra)).collect();
    arena.positions.iter().any(|&p| valid.iter().any(|&i| beta.iter().all(|c| c.expr.eval(p, i))))
}

fn instantiate(t: Template, atoms: &[&Literal]) -> Ltl {
    match t {
        Template::GNotConj => Ltl::globally(Ltl::not(Ltl::and(atoms.iter().map(|a| a.formula.clone()).collect()))),
        Template::GImpliesNextNot => {
            Ltl::globally(Ltl::implies(atoms[0].formula.clone(), Ltl::next(Ltl::not(atoms[1].formula.clone()))))
        }
        Template::GfNot => Ltl::globally(Ltl::finally(Ltl::not(atoms[0].formula.clone()))),
    }
}

/// Ranked assumptions whose negation every play of `cs` satisfies.
pub fn enumerate_candidates(cs: &Counterstrategy, templates: &[Template]) -> Vec<Candidate> {
    let spec = &cs.spec;
    let all_units = units(spec);
    let plays = plays(cs);
    let varied = varied(cs, &all_units);
    let conflict = conflict_props(cs);
    let focused: BTreeSet<usize> = varied.iter().copied().filter(|&u| !all_units[u].bits.is_disjoint(&conflict)).collect();
    let mut found = candidates_over(cs, &plays, &all_units, &focused, templates);
    if found.is_empty() && focused != varied {
        found = candidates_over(cs, &plays, &all_units, &varied, templates);
    }
    for (k, c) in found.iter_mut().enumerate() {
        c.rank = k + 1;
    }
    found
}

fn candidates_over(
    cs: &Counterstrategy,
    plays: &Plays,
    units: &[Unit],
    chosen: &BTreeSet<usize>,
    templates: &[Template],
) -> Vec<Candidate> {
    let spec = &cs.spec;
    // Literals the plays exhibit, in unit order.
    let mut lits: Vec<(usize, usize)> = Vec::new();
    for &u in chosen {
        let mut shown: BTreeSet<usize> = BTreeSet::new();
        for &p in &plays.pos {
            shown.extend(units[u].value_at(p));
        }
        lits.extend(shown.into_iter().map(|v| (u, v)));
    }
    let lit = |k: usize| &units[lits[k].0].literals[lits[k].1];
    let mut ranked: BTreeMap<(usize, Template, Vec<usize>), Candidate> = BTreeMap::new();
    let mut seen_text = BTreeSet::new();
    for &t in templates {
        let combos: Vec<Vec<usize>> = match t {
            Template::GfNot => (0..lits.len()).map(|a| vec![a]).collect(),
            Template::GNotConj => (0..lits.len())
                .flat_map(|a| (a + 1..lits.len()).map(move |b| vec![a, b]))
                .filter(|c| lits[c[0]].0 != lits[c[1]].0)
                .collect(),
            Template::GImpliesNextNot => (0..lits.len())
                .flat_map(|a| (0..lits.len()).map(move |b| vec![a, b]))
                .filter(|c| c[0] != c[1] && lit(c[1]).input)
                .collect(),
        };
        for combo in combos {
            let atoms: Vec<&Literal> = combo.iter().map(|&k| lit(k)).collect();
            let satisfied = match t {
                Template::GNotConj => plays.always_reaches(|n| atoms.iter().all(|a| a.expr.eval(plays.pos[n], 0))),
                Template::GImpliesNextNot => plays.always_reaches_step(&atoms[0].expr, &atoms[1].expr),
                Template::GfNot => plays.eventually_always(&atoms[0].expr),
            };
            if !satisfied {
                continue;
            }
            let assumption = instantiate(t, &atoms);
            let mut probe = spec.clone();
            if probe.add_assumption("candidate", &assumption).is_err() {
                continue;
            }
            let extra = probe.beta_e.last().filter(|_| t != Template::GfNot);
            if let Some(c) = extra {
                if !env_satisfiable(spec, &cs.arena, c) {
                    continue;
                }
            }
            let text = assumption.to_styled(Style::Compact);
            if !seen_text.insert(text.clone()) {
                continue;
            }
            let english = english(&assumption);
            let atoms: Vec<Literal> = atoms.into_iter().cloned().collect();
            ranked.insert(
                (combo.len(), t, combo),
                Candidate { template: t, atoms, assumption, text, english, rank: 0 },
            );
        }
    }
    ranked.into_values().collect()
}

fn words(name: &str) -> String {
    name.replace(['_', '.'], " ")
}

fn value_words(v: &Value) -> String {
    match v {
        Value::Bool(true) => "True".into(),
        Value::Bool(false) => "False".into(),
        other => words(&other.to_string()),
    }
}

fn op_words(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "is",
        CmpOp::Lt => "is less than",
        CmpOp::Le => "is at most",
        CmpOp::Gt => "is greater than",
        CmpOp::Ge => "is at least",
    }
}

fn clause(f: &Ltl) -> String {
    match f {
        Ltl::True => "true".into(),
        Ltl::False => "false".into(),
        Ltl::Prop(p) => format!("{} holds", words(p)),
        Ltl::Atom(a) => {
            let rhs = match &a.rhs {
                Operand::Var(v) => words(&v.to_string()),
                Operand::Value(v) => value_words(v),
            };
            format!("{} {} {rhs}", words(&a.lhs.to_string()), op_words(a.op))
        }
        Ltl::Not(a) => format!("it is not the case that {}", clause(a)),
        Ltl::And(cs) => cs.iter().map(clause).collect::<Vec<_>>().join(" and "),
        Ltl::Or(cs) => cs.iter().map(clause).collect::<Vec<_>>().join(" or "),
        Ltl::Implies(a, b) => format!("if {} then {}", clause(a), clause(b)),
        Ltl::Next(a) => format!("in the next step {}", clause(a)),
        Ltl::Finally(a) => format!("eventually {}", clause(a)),
        Ltl::Globally(a) => match &**a {
            Ltl::Not(b) => format!("it is never the case that {}", clause(b)),
            Ltl::Finally(b) => format!("infinitely often {}", clause(b)),
            other => format!("always {}", clause(other)),
        },
    }
}

/// English reading of a formula, one sentence.
pub fn english(f: &Ltl) -> String {
    let body = match f {
        Ltl::Globally(a) => match &**a {
            Ltl::Not(b) => format!("Globally, it is never the case that {}", clause(b)),
            Ltl::Finally(b) => format!("Globally, eventually {}", clause(b)),
            Ltl::Implies(x, y) => format!("Globally, whenever {}, {}", clause(x), clause(y)),
            other => format!("Globally, {}", clause(other)),
        },
        other => {
            let c = clause(other);
            let mut chars = c.chars();
            chars.next().map(|h| h.to_uppercase().collect::<String>() + chars.as_str()).unwrap_or_default()
        }
    };
    body + "."
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MiningStatus {
    Unrealizable,
    Realizable,
    Exhausted,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("specification is already realizable; nothing to mine")]
pub struct NoOpError;

#[derive(Debug, Error)]
pub enum MineError {
    #[error(transparent)]
    NoOp(#[from] NoOpError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    NonGr1(#[from] NonGr1Error),
}

#[derive(Debug, Clone)]
pub struct MiningSession {
    pub base: Gr1Spec,
    pub spec: Gr1Spec,
    pub accepted: Vec<Candidate>,
    pub rejected: BTreeSet<String>,
    pub pending: Vec<Candidate>,
    pub status: MiningStatus,
    pub iterations: usize,
}

impl MiningSession {
    pub fn new(spec: &Gr1Spec, opts: &SolveOptions) -> Result<(Self, Box<Counterstrategy>), MineError> {
        let Realizability::Unrealizable(cs) = check_realizability(spec, opts)? else {
            return Err(NoOpError.into());
        };
        let session = MiningSession {
            base: spec.clone(),
            spec: spec.clone(),
            accepted: vec![],
            rejected: BTreeSet::new(),
            pending: vec![],
            status: MiningStatus::Unrealizable,
            iterations: 0,
        };
        Ok((session, cs))
    }

    /// Recomputes the pending proposals for a counterstrategy.
    pub fn propose(&mut self, cs: &Counterstrategy, templates: &[Template]) {
        self.iterations += 1;
        let taken: BTreeSet<&str> = self.accepted.iter().map(|c| c.text.as_str()).collect();
        self.pending = enumerate_candidates(cs, templates)
            .into_iter()
            .filter(|c| !self.rejected.contains(&c.text) && !taken.contains(c.text.as_str()))
            .collect();
        if self.pending.is_empty() {
            self.status = MiningStatus::Exhausted;
        }
    }

    pub fn reject(&mut self, rank: usize) -> Option<Candidate> {
        let k = self.pending.iter().position(|c| c.rank == rank)?;
        let c = self.pending.remove(k);
        self.rejected.insert(c.text.clone());
        if self.pending.is_empty() {
            self.status = MiningStatus::Exhausted;
        }
        Some(c)
    }

    /// Conjoins the proposal and re-checks; returns the next counterstrategy
    /// while the strengthened spec stays unrealizable.
    pub fn accept(&mut self, rank: usize, opts: &SolveOptions) -> Result<Option<Box<Counterstrategy>>, MineError> {
        let Some(k) = self.pending.iter().position(|c| c.rank == rank) else { return Ok(None) };
        let c = self.pending.remove(k);
        self.spec.add_assumption(&format!("assumption {}", self.accepted.len() + 1), &c.assumption)?;
        self.accepted.push(c);
        self.pending.clear();
        match check_realizability(&self.spec, opts)? {
            Realizability::Realizable(_) => {
                self.status = MiningStatus::Realizable;
                Ok(None)
            }
            Realizability::Unrealizable(cs) => Ok(Some(cs)),
        }
    }
}

/// Mining loop; `responder` accepts or rejects each proposal in rank order.
pub fn mine(
    spec: &Gr1Spec,
    templates: &[Template],
    opts: &SolveOptions,
    mut responder: impl FnMut(&Candidate) -> bool,
) -> Result<MiningSession, MineError> {
    let (mut session, first) = MiningSession::new(spec, opts)?;
    let mut cs = first;
    'outer: loop {
        session.propose(&cs, templates);
        let pending = session.pending.clone();
        for c in pending {
            if responder(&c) {
                match session.accept(c.rank, opts)? {
                    Some(next) => {
                        cs = next;
                        continue 'outer;
                    }
                    None => break 'outer,
                }
            }
            session.reject(c.rank);
        }
        session.status = MiningStatus::Exhausted;
        break;
    }
    Ok(session)
}
