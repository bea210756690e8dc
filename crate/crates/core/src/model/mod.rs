//! Transition-system models assembled from per-requirement formulas.

mod sal;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{Atom, CmpOp, Ltl, Operand, Value, VarRef};
use crate::types::{assignments, Category, SymbolTable, VarType};

pub use sal::{parse_model, SalParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Placement {
    Theorem,
    Transition,
    Initialization,
    Definition,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("formula assigns input variable {var}")]
pub struct PlacementError {
    pub var: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("conflicting initializations for {var}: {first} and {second}")]
    ConflictingInit { var: String, first: String, second: String },
    #[error("unsupported {placement:?} formula: {formula}")]
    Unsupported { placement: Placement, formula: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Input,
    Output,
    Local,
}

impl Role {
    pub fn keyword(self) -> &'static str {
        match self {
            Role::Input => "INPUT",
            Role::Output => "OUTPUT",
            Role::Local => "LOCAL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeDef {
    Enum(Vec<String>),
    Record(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDecl {
    pub name: String,
    pub def: TypeDef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDecl {
    pub role: Role,
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Definition {
    pub wire: VarRef,
    pub ty: String,
    /// Constraints over the placeholder `Z`, conjoined.
    pub constraints: Vec<Ltl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub var: VarRef,
    pub value: Operand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardedCommand {
    pub guard: Ltl,
    pub assigns: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionModel {
    pub name: String,
    pub types: Vec<TypeDecl>,
    pub vars: Vec<VarDecl>,
    pub definitions: Vec<Definition>,
    pub initializations: Vec<Assignment>,
    pub transitions: Vec<GuardedCommand>,
    pub theorems: Vec<Ltl>,
}

pub const PLACEHOLDER: &str = "Z";

impl TransitionModel {
    pub fn to_sal(&self) -> String {
        sal::print(self)
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn type_decl(&self, name: &str) -> Option<&TypeDecl> {
        self.types.iter().find(|t| t.name == name)
    }

    /// Names of variables assigned by transitions.
    pub fn state_vars(&self) -> BTreeSet<VarRef> {
        self.transitions.iter().flat_map(|c| c.assigns.iter().map(|a| a.var.clone())).collect()
    }
}

fn strip_globally(f: &Ltl) -> Option<&Ltl> {
    match f {
        Ltl::Globally(inner) => Some(inner),
        _ => None,
    }
}

fn split_implication(body: &Ltl) -> (Option<&Ltl>, &Ltl) {
    match body {
        Ltl::Implies(g, c) => (Some(g), c),
        other => (None, other),
    }
}

fn conjuncts(f: &Ltl) -> Vec<&Ltl> {
    match f {
        Ltl::And(cs) => cs.iter().collect(),
        other => vec![other],
    }
}

pub fn place_formula(f: &Ltl, symbols: &SymbolTable, explicit_temporal: bool) -> Result<Placement, PlacementError> {
    if explicit_temporal {
        return Ok(Placement::Theorem);
    }
    let assigned = assignments(f);
    if let Some((v, _, _)) = assigned.iter().find(|(v, _, _)| symbols.category_of(v.root()) == Category::Input) {
        return Err(PlacementError { var: v.to_string() });
    }
    if assigned.is_empty() {
        return Ok(Placement::Theorem);
    }
    if strip_globally(f).is_none() && !f.is_temporal() {
        return Ok(Placement::Initialization);
    }
    if assigned.iter().any(|(v, _, _)| symbols.category_of(v.root()).is_state()) {
        return Ok(Placement::Transition);
    }
    Ok(Placement::Definition)
}

pub(crate) fn rename_var(f: &Ltl, from: &VarRef, to: &VarRef) -> Ltl {
    f.map_leaves(&mut |leaf| match leaf {
        Ltl::Atom(a) => {
            let lhs = if &a.lhs == from { to.clone() } else { a.lhs.clone() };
            let rhs = match &a.rhs {
                Operand::Var(v) if v == from => Operand::Var(to.clone()),
                other => other.clone(),
            };
            Ltl::Atom(Atom { lhs, op: a.op, rhs })
        }
        Ltl::Prop(p) if VarRef::dotted(p) == *from => {
            Ltl::atom(Atom::eq_value(to.clone(), Value::Bool(true)))
        }
        other => other.clone(),
    })
}

fn strip_next(f: &Ltl) -> &Ltl {
    match f {
        Ltl::Next(inner) => strip_next(inner),
        other => other,
    }
}

struct TypeNamer<'a> {
    symbols: &'a SymbolTable,
    by_class: BTreeMap<usize, String>,
    decls: Vec<TypeDecl>,
}

impl TypeNamer<'_> {
    fn name_for(&mut self, v: &VarRef) -> String {
        let Some(&class) = self.symbols.class_of.get(v) else {
            return "BOOLEAN".into();
        };
        if let Some(n) = self.by_class.get(&class) {
            return n.clone();
        }
        let def = match &self.symbols.classes[class].ty {
            VarType::Bool | VarType::Unknown => return "BOOLEAN".into(),
            VarType::Numeric => return "INTEGER".into(),
            VarType::Enum { values } => TypeDef::Enum(values.clone()),
            VarType::Record { fields } => {
                let mut out = Vec::new();
                for f in fields.keys() {
                    let fv = VarRef { path: v.path.iter().cloned().chain(f.split('.').map(String::from)).collect() };
                    out.push((f.clone(), self.name_for(&fv)));
                }
                TypeDef::Record(out)
            }
        };
        let name = format!("Type{}", self.decls.len() + 1);
        self.by_class.insert(class, name.clone());
        self.decls.push(TypeDecl { name: name.clone(), def });
        name
    }
}

/// Builds the model from placed formulas, in formula order.
pub fn emit_model(name: &str, placed: &[(Ltl, Placement)], symbols: &SymbolTable) -> Result<TransitionModel, ModelError> {
    let mut namer = TypeNamer { symbols, by_class: BTreeMap::new(), decls: Vec::new() };
    let roots: BTreeSet<&str> = symbols.variables().map(VarRef::root).collect();
    let mut vars: Vec<VarDecl> = roots
        .iter()
        .map(|r| {
            let role = match symbols.category_of(r) {
                Category::Input => Role::Input,
                Category::StateAndOutput | Category::OutputOnly => Role::Output,
                Category::StateOnly | Category::Wire => Role::Local,
            };
            VarDecl { role, name: r.to_string(), ty: namer.name_for(&VarRef::new(*r)) }
        })
        .collect();
    vars.sort_by(|a, b| (a.role, &a.name).cmp(&(b.role, &b.name)));

    let mut definitions: Vec<Definition> = Vec::new();
    let mut initializations: Vec<Assignment> = Vec::new();
    let mut transitions = Vec::new();
    let mut theorems = Vec::new();
    let z = VarRef::new(PLACEHOLDER);
    for (f, placement) in placed {
        let unsupported = || ModelError::Unsupported { placement: *placement, formula: f.to_string() };
        match placement {
            Placement::Theorem => theorems.push(f.clone()),
            Placement::Initialization => {
                for (var, value, _) in assignments(f) {
                    let Operand::Value(_) = &value else { return Err(unsupported()) };
                    match initializations.iter().find(|a| a.var == var) {
                        Some(prev) if prev.value != value => {
                            return Err(ModelError::ConflictingInit {
                                var: var.to_string(),
                                first: prev.value.to_string(),
                                second: value.to_string(),
                            })
                        }
                        Some(_) => {}
                        None => initializations.push(Assignment { var, value }),
                    }
                }
            }
            Placement::Transition => {
                let body = strip_globally(f).ok_or_else(unsupported)?;
                let (guard, cons) = split_implication(body);
                let mut assigns = Vec::new();
                for c in conjuncts(strip_next(cons)) {
                    match strip_next(c) {
                        Ltl::Atom(a) if a.op == CmpOp::Eq && symbols.category_of(a.lhs.root()).is_state() => {
                            assigns.push(Assignment { var: a.lhs.clone(), value: a.rhs.clone() })
                        }
                        _ => return Err(unsupported()),
                    }
                }
                transitions.push(GuardedCommand { guard: guard.cloned().unwrap_or(Ltl::True), assigns });
            }
            Placement::Definition => {
                let body = strip_globally(f).ok_or_else(unsupported)?;
                let (guard, cons) = split_implication(body);
                for c in conjuncts(cons) {
                    let target = c
                        .vars()
                        .into_iter()
                        .find(|v| {
                            let cat = symbols.category_of(v.root());
                            cat != Category::Input && !cat.is_state()
                        })
                        .ok_or_else(unsupported)?;
                    let constraint = match guard {
                        Some(g) => Ltl::implies(g.clone(), rename_var(c, &target, &z)),
                        None => rename_var(c, &target, &z),
                    };
                    match definitions.iter_mut().find(|d| d.wire == target) {
                        Some(d) => d.constraints.push(constraint),
                        None => definitions.push(Definition {
                            ty: namer.name_for(&target),
                            wire: target,
                            constraints: vec![constraint],
                        }),
                    }
                }
            }
        }
    }
    Ok(TransitionModel {
        name: name.to_string(),
        types: namer.decls,
        vars,
        definitions,
        initializations,
        transitions,
        theorems,
    })
}

/// A pair of transitions that can fire together but disagree on a value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub var: VarRef,
    pub first: usize,
    pub second: usize,
    /// Guard conjuncts not shared by both commands.
    pub condition: Ltl,
}

fn enum_domain(symbols: &SymbolTable, v: &VarRef) -> Option<Vec<Value>> {
    match symbols.type_of(v) {
        VarType::Bool => Some(vec![Value::Bool(false), Value::Bool(true)]),
        VarType::Enum { values } => Some(values.iter().cloned().map(Value::Named).collect()),
        _ => None,
    }
}

/// Evaluates a state formula (no temporal operators) under a valuation of
/// finite-domain variables; other atoms are looked up in `free`.
pub fn eval_state(f: &Ltl, vals: &BTreeMap<VarRef, Value>, free: &BTreeMap<String, bool>) -> Option<bool> {
    Some(match f {
        Ltl::True => true,
        Ltl::False => false,
        Ltl::Prop(p) => match vals.get(&VarRef::dotted(p)) {
            Some(Value::Bool(b)) => *b,
            _ => *free.get(p)?,
        },
        Ltl::Atom(a) => {
            let lhs = vals.get(&a.lhs);
            let rhs = match &a.rhs {
                Operand::Var(v) => vals.get(v),
                Operand::Value(v) => Some(v),
            };
            match (a.op, lhs, rhs) {
                (CmpOp::Eq, Some(l), Some(r)) => l == r,
                _ => *free.get(&a.to_string())?,
            }
        }
        Ltl::Not(x) => !eval_state(x, vals, free)?,
        Ltl::And(cs) => {
            let mut r = true;
            for c in cs {
                r &= eval_state(c, vals, free)?;
            }
            r
        }
        Ltl::Or(cs) => {
            let mut r = false;
            for c in cs {
                r |= eval_state(c, vals, free)?;
            }
            r
        }
        Ltl::Implies(a, b) => !eval_state(a, vals, free)? || eval_state(b, vals, free)?,
        _ => return None,
    })
}

/// Brute-force satisfiability of a state formula over typed domains;
/// atoms on numeric or unknown variables are free booleans.
pub fn state_satisfiable(f: &Ltl, symbols: &SymbolTable) -> bool {
    let mut finite: Vec<(VarRef, Vec<Value>)> = Vec::new();
    let mut free: Vec<String> = Vec::new();
    for v in f.vars() {
        if let Some(d) = enum_domain(symbols, &v) {
            finite.push((v, d));
        }
    }
    for sub in f.subtrees() {
        match sub {
            Ltl::Atom(a) if a.vars().any(|v| !finite.iter().any(|(f, _)| f == v)) => free.push(a.to_string()),
            Ltl::Atom(a) if a.op != CmpOp::Eq => free.push(a.to_string()),
            Ltl::Prop(p) if !finite.iter().any(|(f, _)| *f == VarRef::dotted(p)) => free.push(p.clone()),
            _ => {}
        }
    }
    free.sort();
    free.dedup();
    let total: usize = finite.iter().map(|(_, d)| d.len()).product::<usize>() << free.len();
    for code in 0..total {
        let mut rest = code;
        let mut vals = BTreeMap::new();
        for (v, d) in &finite {
            vals.insert(v.clone(), d[rest % d.len()].clone());
            rest /= d.len();
        }
        let fr: BTreeMap<String, bool> = free.iter().enumerate().map(|(i, n)| (n.clone(), rest >> i & 1 == 1)).collect();
        if eval_state(f, &vals, &fr) == Some(true) {
            return true;
        }
    }
    false
}

/// Pairs of guarded commands that assign different values to the same
/// variable under a satisfiable joint guard.
pub fn find_overlaps(model: &TransitionModel, symbols: &SymbolTable) -> Vec<Overlap> {
    let mut out = Vec::new();
    for (i, a) in model.transitions.iter().enumerate() {
        for (j, b) in model.transitions.iter().enumerate().skip(i + 1) {
            for x in &a.assigns {
                let Some(y) = b.assigns.iter().find(|y| y.var == x.var) else { continue };
                if x.value == y.value {
                    continue;
                }
                if !state_satisfiable(&Ltl::and(vec![a.guard.clone(), b.guard.clone()]), symbols) {
                    continue;
                }
                let ca = conjuncts(&a.guard);
                let cb = conjuncts(&b.guard);
                let distinct: Vec<Ltl> = ca
                    .iter()
                    .filter(|c| !cb.contains(c))
                    .chain(cb.iter().filter(|c| !ca.contains(c)))
                    .map(|c| (*c).clone())
                    .collect();
                out.push(Overlap { var: x.var.clone(), first: i, second: j, condition: Ltl::and(distinct) });
            }
        }
    }
    out
}
