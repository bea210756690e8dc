use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{Ltl, Operand, VarRef};
use crate::model::{rename_var, TransitionModel, PLACEHOLDER};

use super::encode::{domains_from_model, BitEncoding};
use super::prop::{eval, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResourceError {
    #[error("state space exceeds the cap of {cap} states")]
    TooManyStates { cap: usize },
    #[error("{bits} propositions exceed the cap of {cap}")]
    TooManyBits { bits: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeOptions {
    pub max_states: usize,
    pub exclusive_comparisons: bool,
    pub cone_of_influence: bool,
}

impl Default for KripkeOptions {
    fn default() -> Self {
        KripkeOptions { max_states: 1 << 22, exclusive_comparisons: true, cone_of_influence: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeStructure {
    pub props: Vec<String>,
    pub states: Vec<Vec<bool>>,
    pub initial: Vec<usize>,
    pub succ: Vec<Vec<usize>>,
}

impl KripkeStructure {
    pub fn label(&self, s: usize) -> Valuation {
        self.props.iter().cloned().zip(self.states[s].iter().copied()).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

enum NextBit {
    Const(String, bool),
    Copy(String, String),
}

struct Command {
    guard: Ltl,
    updates: Vec<NextBit>,
}

/// Variables the focus set depends on through definitions and transitions.
pub fn cone_of_influence(m: &TransitionModel, focus: &BTreeSet<VarRef>) -> BTreeSet<VarRef> {
    let z = VarRef::new(PLACEHOLDER);
    let mut cone = focus.clone();
    loop {
        let before = cone.len();
        for d in &m.definitions {
            if cone.contains(&d.wire) {
                for c in &d.constraints {
                    cone.extend(c.vars().into_iter().filter(|v| *v != z));
                }
            }
        }
        for c in &m.transitions {
            if c.assigns.iter().any(|a| cone.contains(&a.var)) {
                cone.extend(c.guard.vars());
                for a in &c.assigns {
                    if let Operand::Var(v) = &a.value {
                        cone.insert(v.clone());
                    }
                }
            }
        }
        if cone.len() == before {
            return cone;
        }
    }
}

/// Builds the Kripke structure of a model. Numeric variables only appear
/// through comparison atoms, which behave as inputs. `extra` formulas are
/// encoded first so their comparison atoms are included.
pub fn build_kripke(
    m: &TransitionModel,
    extra: &[Ltl],
    opts: &KripkeOptions,
) -> Result<(KripkeStructure, BitEncoding, Vec<Ltl>), ResourceError> {
    let mut enc = BitEncoding::new(domains_from_model(m), opts.exclusive_comparisons);
    let extra_enc: Vec<Ltl> = extra.iter().map(|f| enc.encode(f)).collect();
    let z = VarRef::new(PLACEHOLDER);
    let relevant = if opts.cone_of_influence {
        let focus: BTreeSet<VarRef> = extra.iter().flat_map(|f| f.vars()).collect();
        cone_of_influence(m, &focus)
    } else {
        enc.domains.keys().cloned().collect()
    };
    let defs: Vec<Ltl> = m
        .definitions
        .iter()
        .filter(|d| relevant.contains(&d.wire))
        .flat_map(|d| d.constraints.iter().map(|c| rename_var(c, &z, &d.wire)).collect::<Vec<_>>())
        .map(|c| enc.encode(&c))
        .collect();
    let mut commands = Vec::new();
    for c in &m.transitions {
        if !c.assigns.iter().any(|a| relevant.contains(&a.var)) {
            continue;
        }
        let guard = enc.encode(&c.guard);
        let mut updates = Vec::new();
        for a in &c.assigns {
            match &a.value {
                Operand::Value(v) => {
                    for (b, val) in enc.value_bits(&a.var, v).unwrap_or_default() {
                        updates.push(NextBit::Const(b, val));
                    }
                }
                Operand::Var(src) => {
                    for (b, s) in enc.props_of(&a.var).into_iter().zip(enc.props_of(src)) {
                        updates.push(NextBit::Copy(b, s));
                    }
                }
            }
        }
        commands.push(Command { guard, updates });
    }
    let mut init_bits: Vec<(String, bool)> = Vec::new();
    for a in &m.initializations {
        if let Operand::Value(v) = &a.value {
            init_bits.extend(enc.value_bits(&a.var, v).unwrap_or_default());
        }
    }

    let state_vars: BTreeSet<VarRef> = m
        .transitions
        .iter()
        .flat_map(|c| c.assigns.iter().map(|a| a.var.clone()))
        .chain(m.initializations.iter().map(|a| a.var.clone()))
        .filter(|v| relevant.contains(v))
        .collect();
    let defined: BTreeSet<VarRef> =
        m.definitions.iter().map(|d| d.wire.clone()).filter(|v| relevant.contains(v) && !state_vars.contains(v)).collect();
    let state_props: Vec<String> = state_vars.iter().flat_map(|v| enc.props_of(v)).collect();
    let defined_props: Vec<String> = defined.iter().flat_map(|v| enc.props_of(v)).collect();
    let mut free_props: Vec<String> = relevant
        .iter()
        .filter(|v| !state_vars.contains(v) && !defined.contains(v))
        .flat_map(|v| enc.props_of(v))
        .collect();
    for (a, n) in &enc.comparisons {
        if a.vars().any(|v| relevant.contains(v)) || !opts.cone_of_influence {
            free_props.push(n.clone());
        }
    }
    let props: Vec<String> = state_props.iter().chain(&free_props).chain(&defined_props).cloned().collect();
    let prop_index: HashMap<&str, usize> = props.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let all: BTreeSet<&str> = props.iter().map(String::as_str).collect();
    let invariants: Vec<Ltl> =
        enc.constraints().into_iter().filter(|c| c.props().iter().all(|p| all.contains(p.as_str()))).collect();
    let (ns, nf, nd) = (state_props.len(), free_props.len(), defined_props.len());
    if ns + nf + nd > 62 || nf + nd > 30 {
        return Err(ResourceError::TooManyStates { cap: opts.max_states });
    }

    let holds = |f: &Ltl, bits: &[bool]| {
        eval(f, &|p| Some(prop_index.get(p).map(|&i| bits[i]).unwrap_or(false))) == Some(true)
    };
    let mut completion_cache: HashMap<Vec<bool>, Vec<Vec<bool>>> = HashMap::new();
    let mut completions = |state: &[bool]| -> Vec<Vec<bool>> {
        completion_cache
            .entry(state.to_vec())
            .or_insert_with(|| {
                let mut out = Vec::new();
                for code in 0u64..(1u64 << (nf + nd)) {
                    let mut bits = state.to_vec();
                    bits.extend((0..nf + nd).map(|j| code >> j & 1 == 1));
                    if invariants.iter().all(|c| holds(c, &bits)) && defs.iter().all(|c| holds(c, &bits)) {
                        out.push(bits);
                    }
                }
                out
            })
            .clone()
    };

    let mut states: Vec<Vec<bool>> = Vec::new();
    let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut intern = |bits: Vec<bool>, states: &mut Vec<Vec<bool>>, succ: &mut Vec<Vec<usize>>| -> Result<usize, ResourceError> {
        if let Some(&i) = index.get(&bits) {
            return Ok(i);
        }
        if states.len() >= opts.max_states {
            return Err(ResourceError::TooManyStates { cap: opts.max_states });
        }
        let i = states.len();
        index.insert(bits.clone(), i);
        states.push(bits);
        succ.push(Vec::new());
        Ok(i)
    };
    let mut initial = Vec::new();
    for code in 0u64..(1u64 << ns) {
        let bits: Vec<bool> = (0..ns).map(|j| code >> j & 1 == 1).collect();
        if init_bits.iter().any(|(b, v)| prop_index.get(b.as_str()).is_some_and(|&i| i < ns && bits[i] != *v)) {
            continue;
        }
        for full in completions(&bits) {
            let i = intern(full, &mut states, &mut succ)?;
            if !initial.contains(&i) {
                initial.push(i);
            }
        }
    }
    let mut frontier = 0;
    while frontier < states.len() {
        let cur = states[frontier].clone();
        let enabled: Vec<&Command> = commands.iter().filter(|c| holds(&c.guard, &cur)).collect();
        let mut nexts: BTreeSet<Vec<bool>> = BTreeSet::new();
        if enabled.is_empty() {
            nexts.insert(cur[..ns].to_vec());
        }
        for c in enabled {
            let mut next = cur[..ns].to_vec();
            for u in &c.updates {
                match u {
                    NextBit::Const(b, v) => {
                        if let Some(&i) = prop_index.get(b.as_str()) {
                            next[i] = *v;
                        }
                    }
                    NextBit::Copy(b, s) => {
                        if let (Some(&i), Some(&j)) = (prop_index.get(b.as_str()), prop_index.get(s.as_str())) {
                            next[i] = cur[j];
                        }
                    }
                }
            }
            nexts.insert(next);
        }
        let mut out = Vec::new();
        for n in nexts {
            for full in completions(&n) {
                out.push(intern(full, &mut states, &mut succ)?);
            }
        }
        if out.is_empty() {
            out.push(frontier);
        }
        out.sort_unstable();
        out.dedup();
        succ[frontier] = out;
        frontier += 1;
    }
    Ok((KripkeStructure { props, states, initial, succ }, enc, extra_enc))
}
