use std::collections::HashMap;

use super::{Conjunct, Gr1Spec};

/// A legal environment move and the system replies allowed after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub input: u64,
    pub replies: Vec<usize>,
}

/// Explicit game graph. Positions are packed (input, output) valuations that
/// satisfy the system invariants; the environment moves first each round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arena {
    pub positions: Vec<u64>,
    pub index: HashMap<u64, usize>,
    /// No legal environment move (an assumption already failed): system wins.
    pub env_dead: Vec<bool>,
    pub moves: Vec<Vec<Move>>,
    /// Initial environment choices with the allowed initial positions.
    pub initial: Vec<Move>,
}

fn all(cs: &[Conjunct], cur: u64, next: u64) -> bool {
    cs.iter().all(|c| c.expr.eval(cur, next))
}

impl Arena {
    pub fn build(spec: &Gr1Spec) -> Arena {
        let ni = spec.inputs.len();
        let no = spec.outputs.len();
        let (inv_e, trans_e): (Vec<Conjunct>, Vec<Conjunct>) =
            spec.beta_e.iter().cloned().partition(|c| !c.expr.uses_next());
        let (inv_s, trans_s): (Vec<Conjunct>, Vec<Conjunct>) =
            spec.beta_s.iter().cloned().partition(|c| !c.expr.uses_next());
        let valid_inputs: Vec<u64> = (0..1u64 << ni).filter(|&i| all(&spec.domain_e, i, 0)).collect();
        let mut outs_for: HashMap<u64, Vec<u64>> = HashMap::new();
        let mut positions = Vec::new();
        for &i in &valid_inputs {
            let mut outs = Vec::new();
            for o in 0..1u64 << no {
                let p = spec.pack(i, o);
                if all(&spec.domain_s, p, 0) && all(&inv_s, p, 0) {
                    outs.push(o);
                    positions.push(p);
                }
            }
            outs_for.insert(i, outs);
        }
        let index: HashMap<u64, usize> = positions.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let mut env_dead = Vec::with_capacity(positions.len());
        let mut moves = Vec::with_capacity(positions.len());
        for &p in &positions {
            if !all(&inv_e, p, 0) {
                env_dead.push(true);
                moves.push(Vec::new());
                continue;
            }
            let mut ms = Vec::new();
            for &i in &valid_inputs {
                if !all(&trans_e, p, i) {
                    continue;
                }
                let replies = outs_for[&i]
                    .iter()
                    .map(|&o| spec.pack(i, o))
                    .filter(|&q| all(&trans_s, p, q))
                    .map(|q| index[&q])
                    .collect();
                ms.push(Move { input: i, replies });
            }
            env_dead.push(ms.is_empty());
            moves.push(ms);
        }
        let initial = valid_inputs
            .iter()
            .filter(|&&i| all(&spec.alpha_e, i, 0))
            .map(|&i| Move {
                input: i,
                replies: outs_for[&i]
                    .iter()
                    .map(|&o| spec.pack(i, o))
                    .filter(|&q| all(&spec.alpha_s, q, 0))
                    .map(|q| index[&q])
                    .collect(),
            })
            .collect();
        Arena { positions, index, env_dead, moves, initial }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}
