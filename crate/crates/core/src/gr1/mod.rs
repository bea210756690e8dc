//! GR(1) specifications, the explicit game arena, realizability, strategies
//! and the interactive debugging game.

mod arena;
mod game;
mod solve;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{domains_from_symbols, BitEncoding};
use crate::ltl::{Ltl, VarRef};
use crate::types::{Category, SymbolTable};

pub use arena::Arena;
pub use game::{violations, GameSession, ProtocolError, StepRecord, Verdict};
pub use solve::{check_realizability, Counterstrategy, CsMemory, MooreMachine, Realizability, SolveOptions, RESET, SINK};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{name} is not a GR(1) formula: {formula}")]
pub struct NonGr1Error {
    pub name: String,
    pub formula: String,
}

/// Boolean expression over the current and next valuation, packed as bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Const(bool),
    Cur(u32),
    Next(u32),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, cur: u64, next: u64) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Cur(i) => cur >> i & 1 == 1,
            Expr::Next(i) => next >> i & 1 == 1,
            Expr::Not(a) => !a.eval(cur, next),
            Expr::And(cs) => cs.iter().all(|c| c.eval(cur, next)),
            Expr::Or(cs) => cs.iter().any(|c| c.eval(cur, next)),
        }
    }

    pub fn uses_next(&self) -> bool {
        match self {
            Expr::Next(_) => true,
            Expr::Const(_) | Expr::Cur(_) => false,
            Expr::Not(a) => a.uses_next(),
            Expr::And(cs) | Expr::Or(cs) => cs.iter().any(Expr::uses_next),
        }
    }

    fn bits(&self, next: bool, out: &mut BTreeSet<u32>) {
        match self {
            Expr::Cur(i) if !next => {
                out.insert(*i);
            }
            Expr::Next(i) if next => {
                out.insert(*i);
            }
            Expr::Not(a) => a.bits(next, out),
            Expr::And(cs) | Expr::Or(cs) => cs.iter().for_each(|c| c.bits(next, out)),
            _ => {}
        }
    }

    pub fn next_bits(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.bits(true, &mut out);
        out
    }
}

/// One named conjunct of a GR(1) specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conjunct {
    pub name: String,
    /// Propositional formula; `X` only in transition conjuncts.
    pub formula: Ltl,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gr1Spec {
    /// Input propositions: bit `k` of a packed valuation for the `k`-th name.
    pub inputs: Vec<String>,
    /// Output propositions, packed after the inputs.
    pub outputs: Vec<String>,
    pub alpha_e: Vec<Conjunct>,
    pub alpha_s: Vec<Conjunct>,
    pub beta_e: Vec<Conjunct>,
    pub beta_s: Vec<Conjunct>,
    pub gamma_e: Vec<Conjunct>,
    pub gamma_s: Vec<Conjunct>,
    /// Encoding invariants on inputs (env side) and outputs (sys side).
    pub domain_e: Vec<Conjunct>,
    pub domain_s: Vec<Conjunct>,
    pub encoding: BitEncoding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Init,
    Trans,
    Fair,
}

fn shape(f: &Ltl) -> Option<(Shape, &Ltl)> {
    fn next_ok(f: &Ltl, under_x: bool) -> bool {
        match f {
            Ltl::Next(a) => !under_x && next_ok(a, true),
            Ltl::Globally(_) | Ltl::Finally(_) => false,
            other => other.children().into_iter().all(|c| next_ok(c, under_x)),
        }
    }
    match f {
        Ltl::Globally(inner) => match &**inner {
            Ltl::Finally(p) if !p.is_temporal() => Some((Shape::Fair, p)),
            body if next_ok(body, false) => Some((Shape::Trans, body)),
            _ => None,
        },
        other if !other.is_temporal() => Some((Shape::Init, other)),
        _ => None,
    }
}

impl Gr1Spec {
    pub fn bits(&self) -> usize {
        self.inputs.len() + self.outputs.len()
    }

    pub fn prop_index(&self) -> BTreeMap<String, u32> {
        self.inputs.iter().chain(&self.outputs).enumerate().map(|(i, p)| (p.clone(), i as u32)).collect()
    }

    pub fn compile(&self, f: &Ltl) -> Result<Expr, String> {
        compile(f, &self.prop_index(), false)
    }

    pub fn input_mask(&self) -> u64 {
        (1u64 << self.inputs.len()) - 1
    }

    pub fn pack(&self, input: u64, output: u64) -> u64 {
        input | output << self.inputs.len()
    }

    pub fn split(&self, pos: u64) -> (u64, u64) {
        (pos & self.input_mask(), pos >> self.inputs.len())
    }

    /// Valuation of the named propositions in a packed position.
    pub fn valuation(&self, pos: u64) -> BTreeMap<String, bool> {
        self.inputs.iter().chain(&self.outputs).enumerate().map(|(i, p)| (p.clone(), pos >> i & 1 == 1)).collect()
    }

    /// Packs `names` from `v`; a missing name is returned as the error.
    pub fn pack_names(names: &[String], v: &BTreeMap<String, bool>) -> Result<u64, String> {
        let mut out = 0;
        for (i, n) in names.iter().enumerate() {
            match v.get(n) {
                Some(true) => out |= 1 << i,
                Some(false) => {}
                None => return Err(n.clone()),
            }
        }
        Ok(out)
    }

    /// Adds an environment assumption, classified by shape.
    pub fn add_assumption(&mut self, name: &str, f: &Ltl) -> Result<(), NonGr1Error> {
        let err = || NonGr1Error { name: name.to_string(), formula: f.to_string() };
        let encoded = self.encoding.clone().encode(f);
        let (s, body) = shape(&encoded).ok_or_else(err)?;
        let expr = self.compile(body).map_err(|_| err())?;
        let outs = self.inputs.len() as u32;
        if s == Shape::Trans && expr.next_bits().iter().any(|b| *b >= outs) {
            return Err(err());
        }
        let c = Conjunct { name: name.to_string(), formula: body.clone(), expr };
        match s {
            Shape::Init => self.alpha_e.push(c),
            Shape::Trans => self.beta_e.push(c),
            Shape::Fair => self.gamma_e.push(c),
        }
        Ok(())
    }

    pub fn conjuncts(&self) -> impl Iterator<Item = &Conjunct> {
        self.alpha_e
            .iter()
            .chain(&self.alpha_s)
            .chain(&self.beta_e)
            .chain(&self.beta_s)
            .chain(&self.gamma_e)
            .chain(&self.gamma_s)
    }
}

fn compile(f: &Ltl, index: &BTreeMap<String, u32>, next: bool) -> Result<Expr, String> {
    Ok(match f {
        Ltl::True => Expr::Const(true),
        Ltl::False => Expr::Const(false),
        Ltl::Prop(p) => {
            let i = *index.get(p).ok_or_else(|| p.clone())?;
            if next { Expr::Next(i) } else { Expr::Cur(i) }
        }
        Ltl::Not(a) => Expr::Not(Box::new(compile(a, index, next)?)),
        Ltl::And(cs) => Expr::And(cs.iter().map(|c| compile(c, index, next)).collect::<Result<_, _>>()?),
        Ltl::Or(cs) => Expr::Or(cs.iter().map(|c| compile(c, index, next)).collect::<Result<_, _>>()?),
        Ltl::Implies(a, b) => Expr::Or(vec![Expr::Not(Box::new(compile(a, index, next)?)), compile(b, index, next)?]),
        Ltl::Next(a) => compile(a, index, true)?,
        other => return Err(format!("temporal operator in {other}")),
    })
}

/// Splits variables into inputs and outputs. By default inputs are the
/// variables categorized as input; every wire and control is an output.
pub fn io_partition(symbols: &SymbolTable, inputs_override: Option<&BTreeSet<String>>) -> BTreeSet<VarRef> {
    symbols
        .variables()
        .filter(|v| match inputs_override {
            Some(names) => names.contains(v.root()),
            None => symbols.category_of(v.root()) == Category::Input,
        })
        .cloned()
        .collect()
}

/// Classifies named requirement formulas into the system side of a spec.
pub fn build_gr1(
    formulas: &[(String, Ltl)],
    symbols: &SymbolTable,
    inputs_override: Option<&BTreeSet<String>>,
    exclusive_comparisons: bool,
) -> Result<Gr1Spec, NonGr1Error> {
    let mut enc = BitEncoding::new(domains_from_symbols(symbols), exclusive_comparisons);
    let encoded: Vec<Ltl> = formulas.iter().map(|(_, f)| enc.encode(f)).collect();
    let input_vars = io_partition(symbols, inputs_override);
    let mut inputs: Vec<String> = input_vars.iter().flat_map(|v| enc.props_of(v)).collect();
    let mut outputs: Vec<String> =
        symbols.variables().filter(|v| !input_vars.contains(v)).flat_map(|v| enc.props_of(v)).collect();
    for (a, n) in &enc.comparisons {
        if a.vars().all(|v| input_vars.contains(v) || !symbols.class_of.contains_key(v)) {
            inputs.push(n.clone());
        } else {
            outputs.push(n.clone());
        }
    }
    let mut spec = Gr1Spec {
        inputs,
        outputs,
        alpha_e: vec![],
        alpha_s: vec![],
        beta_e: vec![],
        beta_s: vec![],
        gamma_e: vec![],
        gamma_s: vec![],
        domain_e: vec![],
        domain_s: vec![],
        encoding: enc.clone(),
    };
    for ((name, original), f) in formulas.iter().zip(&encoded) {
        let err = || NonGr1Error { name: name.clone(), formula: original.to_string() };
        let (s, body) = shape(f).ok_or_else(err)?;
        let expr = spec.compile(body).map_err(|_| err())?;
        let c = Conjunct { name: name.clone(), formula: body.clone(), expr };
        match s {
            Shape::Init => spec.alpha_s.push(c),
            Shape::Trans => spec.beta_s.push(c),
            Shape::Fair => spec.gamma_s.push(c),
        }
    }
    let n_in = spec.inputs.len() as u32;
    for (k, inv) in enc.constraints().into_iter().enumerate() {
        let expr = spec.compile(&inv).expect("encoding props are declared");
        let mut bits = BTreeSet::new();
        expr.bits(false, &mut bits);
        let c = Conjunct { name: format!("domain {}", k + 1), formula: inv, expr };
        if bits.iter().all(|b| *b < n_in) {
            spec.domain_e.push(c);
        } else {
            spec.domain_s.push(c);
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::VariablePartition;
    use crate::ltl::parse;
    use crate::types::{gather_evidence, merge_types};

    fn spec(src: &[&str], inputs: &[&str]) -> Result<Gr1Spec, NonGr1Error> {
        let fs: Vec<(String, Ltl)> = src.iter().enumerate().map(|(i, s)| ((i + 1).to_string(), parse(s).unwrap())).collect();
        let only: Vec<Ltl> = fs.iter().map(|(_, f)| f.clone()).collect();
        let partition = VariablePartition { inputs: inputs.iter().map(|s| s.to_string()).collect(), ..Default::default() };
        let (symbols, _) = merge_types(&gather_evidence(&only), &partition);
        build_gr1(&fs, &symbols, None, true)
    }

    #[test]
    fn shapes() {
        let s = spec(&["G(F(p = TRUE))", "G((r = TRUE) => X(p = FALSE))", "p = TRUE"], &["r"]).unwrap();
        assert_eq!(s.gamma_s.len(), 1);
        assert_eq!(s.beta_s.len(), 1);
        assert_eq!(s.alpha_s.len(), 1);
        assert_eq!(s.inputs, vec!["r".to_string()]);
        assert_eq!(s.outputs, vec!["p".to_string()]);
    }

    #[test]
    fn persistence_is_rejected() {
        let e = spec(&["F(G(p = TRUE))"], &[]).unwrap_err();
        assert_eq!(e.name, "1");
    }

    #[test]
    fn env_transitions_only_look_at_next_inputs() {
        let mut s = spec(&["G((r = TRUE) => (p = TRUE))"], &["r"]).unwrap();
        assert!(s.add_assumption("a", &parse("G((r = TRUE) => X(r = FALSE))").unwrap()).is_ok());
        assert!(s.add_assumption("b", &parse("G((r = TRUE) => X(p = FALSE))").unwrap()).is_err());
        assert_eq!(s.beta_e.len(), 1);
    }
}
