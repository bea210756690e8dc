//! Propositional encoding, Büchi automata, emptiness and model checking.

pub mod buchi;
pub mod encode;
pub mod kripke;
pub mod prop;
pub mod search;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ltl::Ltl;
use crate::model::TransitionModel;
use crate::types::SymbolTable;

pub use buchi::{accepts, ltl_to_buchi, nnf, BuchiAutomaton, Edge};
pub use encode::{domains_from_model, domains_from_symbols, propositionalize, BitEncoding, Domain, EnumBits};
pub use kripke::{build_kripke, cone_of_influence, KripkeOptions, KripkeStructure, ResourceError};
pub use prop::Valuation;

/// An ultimately periodic sequence of valuations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lasso {
    pub prefix: Vec<Valuation>,
    pub cycle: Vec<Valuation>,
}

impl Lasso {
    pub fn steps(&self) -> impl Iterator<Item = &Valuation> {
        self.prefix.iter().chain(&self.cycle)
    }

    /// Numbered table of typed values, one row per step.
    pub fn render(&self, enc: &BitEncoding) -> String {
        let mut out = String::new();
        for (i, v) in self.steps().enumerate() {
            if i == self.prefix.len() {
                out.push_str("-- cycle --\n");
            }
            let cells: Vec<String> = enc.decode(v).into_iter().map(|(k, x)| format!("{k}={x}")).collect();
            let _ = writeln!(out, "{i:>3}  {}", cells.join("  "));
        }
        out
    }
}

/// `None` when the language is empty, otherwise an accepted lasso.
pub fn is_empty(a: &BuchiAutomaton) -> Option<Lasso> {
    let succ = a.successor_lists();
    let (stem, cycle) = search::nested_dfs(&a.initial, |q| succ[q].clone(), |q| a.accepting.contains(q))?;
    let states: Vec<usize> = stem.iter().chain(&cycle).copied().collect();
    let loop_to = stem.len();
    let letter = |i: usize| -> Valuation {
        let from = states[i];
        let to = if i + 1 == states.len() { states[loop_to] } else { states[i + 1] };
        let edge = a.out_edges(from).find(|e| e.to == to).expect("search follows edges");
        let mut v = prop::sat(&edge.label).expect("edge labels are satisfiable");
        for p in &a.props {
            v.entry(p.clone()).or_insert(false);
        }
        v
    };
    Some(Lasso {
        prefix: (0..loop_to).map(letter).collect(),
        cycle: (loop_to..states.len()).map(letter).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Consistency {
    Consistent(Lasso),
    Inconsistent,
}

/// Propositionalizes and conjoins the formulas with the encoding invariants,
/// then checks the automaton for emptiness. Non-global formulas constrain
/// the first step only.
pub fn check_consistency(formulas: &[Ltl], symbols: &SymbolTable, exclusive_comparisons: bool) -> (Consistency, BitEncoding) {
    let mut enc = BitEncoding::new(domains_from_symbols(symbols), exclusive_comparisons);
    let mut parts: Vec<Ltl> = formulas.iter().map(|f| enc.encode(f)).collect();
    let inv = enc.invariant();
    if inv != Ltl::True {
        parts.push(Ltl::globally(inv));
    }
    let a = ltl_to_buchi(&Ltl::and(parts));
    match is_empty(&a) {
        Some(l) => (Consistency::Consistent(l), enc),
        None => (Consistency::Inconsistent, enc),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckResult {
    Holds,
    Counterexample(Lasso),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub result: CheckResult,
    pub encoding: BitEncoding,
    pub kripke_states: usize,
    pub automaton_states: usize,
}

pub fn model_check(m: &TransitionModel, theorem: &Ltl, opts: &KripkeOptions) -> Result<CheckReport, ResourceError> {
    let (k, enc, encoded) = build_kripke(m, std::slice::from_ref(theorem), opts)?;
    let a = ltl_to_buchi(&Ltl::not(encoded[0].clone()));
    let labels: Vec<Valuation> = (0..k.len()).map(|s| k.label(s)).collect();
    let init: Vec<(usize, usize)> =
        k.initial.iter().flat_map(|&s| a.initial.iter().map(move |&q| (s, q))).collect();
    let succ = |(s, q): (usize, usize)| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for e in a.out_edges(q) {
            if buchi::label_holds(&e.label, &labels[s]) {
                for &t in &k.succ[s] {
                    out.push((t, e.to));
                }
            }
        }
        out
    };
    let found = search::nested_dfs(&init, succ, |&(_, q)| a.accepting.contains(&q));
    let result = match found {
        None => CheckResult::Holds,
        Some((stem, cycle)) => CheckResult::Counterexample(Lasso {
            prefix: stem.iter().map(|&(s, _)| labels[s].clone()).collect(),
            cycle: cycle.iter().map(|&(s, _)| labels[s].clone()).collect(),
        }),
    };
    Ok(CheckReport { result, encoding: enc, kripke_states: k.len(), automaton_states: a.len() })
}
