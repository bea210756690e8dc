//! Brute-force GR(1) oracle: a turn-based parity game solved by Zielonka.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use reqlift_core::automata::BitEncoding;
use reqlift_core::gr1::{violations, Conjunct, Expr, Gr1Spec};
use reqlift_core::ltl::Ltl;

pub fn random_expr(rng: &mut StdRng, cur_bits: u32, next_bits: u32, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        let total = cur_bits + next_bits;
        let k = rng.gen_range(0..total);
        let leaf = if k < cur_bits { Expr::Cur(k) } else { Expr::Next(k - cur_bits) };
        return if rng.gen_bool(0.4) { Expr::Not(Box::new(leaf)) } else { leaf };
    }
    let kids = (0..2).map(|_| random_expr(rng, cur_bits, next_bits, depth - 1)).collect();
    match rng.gen_range(0..3) {
        0 => Expr::And(kids),
        1 => Expr::Or(kids),
        _ => Expr::Not(Box::new(Expr::Or(kids))),
    }
}

pub fn conj(name: &str, expr: Expr) -> Conjunct {
    Conjunct { name: name.into(), formula: Ltl::True, expr }
}

pub fn random_spec(seed: u64) -> Gr1Spec {
    let mut rng = StdRng::seed_from_u64(seed);
    let ni = rng.gen_range(1..=3u32);
    let no = rng.gen_range(1..=3u32);
    let all = ni + no;
    let list = |rng: &mut StdRng, max: usize, cur: u32, next: u32| -> Vec<Conjunct> {
        (0..rng.gen_range(0..=max)).map(|k| conj(&format!("c{k}"), random_expr(rng, cur, next, 2))).collect()
    };
    Gr1Spec {
        inputs: (0..ni).map(|k| format!("i{k}")).collect(),
        outputs: (0..no).map(|k| format!("o{k}")).collect(),
        alpha_e: list(&mut rng, 1, ni, 0),
        alpha_s: list(&mut rng, 1, all, 0),
        beta_e: list(&mut rng, 2, all, ni),
        beta_s: list(&mut rng, 3, all, all),
        gamma_e: list(&mut rng, 2, all, 0),
        gamma_s: list(&mut rng, 2, all, 0),
        domain_e: vec![],
        domain_s: vec![],
        encoding: BitEncoding::new(BTreeMap::new(), true),
    }
}

pub fn holds(cs: &[Conjunct], cur: u64, next: u64) -> bool {
    cs.iter().all(|c| c.expr.eval(cur, next))
}

pub fn invariants(cs: &[Conjunct]) -> Vec<Conjunct> {
    cs.iter().filter(|c| c.expr.next_bits().is_empty()).cloned().collect()
}

pub fn transitions(cs: &[Conjunct]) -> Vec<Conjunct> {
    cs.iter().filter(|c| !c.expr.next_bits().is_empty()).cloned().collect()
}

/// Parity game: max priority seen infinitely often, even wins for player 0.
pub struct Parity {
    owner: Vec<u8>,
    prio: Vec<u32>,
    succ: Vec<Vec<usize>>,
}

impl Parity {
    fn attractor(&self, alive: &[bool], target: &[bool], player: u8) -> Vec<bool> {
        let n = self.owner.len();
        let mut attr = target.to_vec();
        loop {
            let mut changed = false;
            for v in 0..n {
                if !alive[v] || attr[v] {
                    continue;
                }
                let succ: Vec<usize> = self.succ[v].iter().copied().filter(|&w| alive[w]).collect();
                let pull = if self.owner[v] == player {
                    succ.iter().any(|&w| attr[w])
                } else {
                    succ.iter().all(|&w| attr[w])
                };
                if pull {
                    attr[v] = true;
                    changed = true;
                }
            }
            if !changed {
                return attr;
            }
        }
    }

    /// Winning regions of player 0 and 1 within `alive`.
    fn zielonka(&self, alive: &[bool]) -> (Vec<bool>, Vec<bool>) {
        let n = self.owner.len();
        let Some(d) = (0..n).filter(|&v| alive[v]).map(|v| self.prio[v]).max() else {
            return (vec![false; n], vec![false; n]);
        };
        let p = (d % 2) as u8;
        let top: Vec<bool> = (0..n).map(|v| alive[v] && self.prio[v] == d).collect();
        let a = self.attractor(alive, &top, p);
        let rest: Vec<bool> = (0..n).map(|v| alive[v] && !a[v]).collect();
        let (w0, w1) = self.zielonka(&rest);
        let opp = if p == 0 { &w1 } else { &w0 };
        if !opp.iter().any(|&b| b) {
            let mine: Vec<bool> = (0..n).map(|v| alive[v]).collect();
            return if p == 0 { (mine, vec![false; n]) } else { (vec![false; n], mine) };
        }
        let b = self.attractor(alive, opp, 1 - p);
        let rest: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
        let (mut w0, mut w1) = self.zielonka(&rest);
        let grow = if p == 0 { &mut w1 } else { &mut w0 };
        for v in 0..n {
            if b[v] {
                grow[v] = true;
            }
        }
        (w0, w1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Start,
    SysWin,
    EnvWin,
    Sys { prev: Option<u64>, input: u64, ce: usize, cs: usize },
    Env { pos: u64, ce: usize, cs: usize, prio: u32 },
}

/// Brute-force game: explicit turns, counters for the fairness goals, solved
/// as a parity game.
pub fn oracle_realizable(spec: &Gr1Spec) -> bool {
    let ni = spec.inputs.len();
    let no = spec.outputs.len();
    let je: Vec<Expr> = if spec.gamma_e.is_empty() { vec![Expr::Const(true)] } else { spec.gamma_e.iter().map(|c| c.expr.clone()).collect() };
    let js: Vec<Expr> = if spec.gamma_s.is_empty() { vec![Expr::Const(true)] } else { spec.gamma_s.iter().map(|c| c.expr.clone()).collect() };
    let (inv_e, tr_e) = (invariants(&spec.beta_e), transitions(&spec.beta_e));
    let (inv_s, tr_s) = (invariants(&spec.beta_s), transitions(&spec.beta_s));
    let mut ids: HashMap<Node, usize> = HashMap::new();
    let mut nodes: Vec<Node> = vec![];
    let mut succ: Vec<Vec<usize>> = vec![];
    let mut stack = vec![];
    let mut id = |n: Node, nodes: &mut Vec<Node>, succ: &mut Vec<Vec<usize>>, stack: &mut Vec<usize>| {
        *ids.entry(n).or_insert_with(|| {
            nodes.push(n);
            succ.push(vec![]);
            stack.push(nodes.len() - 1);
            nodes.len() - 1
        })
    };
    id(Node::Start, &mut nodes, &mut succ, &mut stack);
    while let Some(k) = stack.pop() {
        let mut out = vec![];
        match nodes[k] {
            Node::SysWin | Node::EnvWin => out.push(k),
            Node::Start => {
                for i in 0..1u64 << ni {
                    if holds(&spec.domain_e, i, 0) && holds(&spec.alpha_e, i, 0) {
                        out.push(id(Node::Sys { prev: None, input: i, ce: 0, cs: 0 }, &mut nodes, &mut succ, &mut stack));
                    }
                }
                if out.is_empty() {
                    out.push(id(Node::SysWin, &mut nodes, &mut succ, &mut stack));
                }
            }
            Node::Sys { prev, input, ce, cs } => {
                for o in 0..1u64 << no {
                    let p = input | o << ni;
                    let ok = holds(&spec.domain_s, p, 0)
                        && holds(&inv_s, p, 0)
                        && (prev.is_some() || holds(&spec.alpha_s, p, 0))
                        && prev.is_none_or(|q| holds(&tr_s, q, p));
                    if !ok {
                        continue;
                    }
                    let target = if !holds(&inv_e, p, 0) {
                        Node::SysWin
                    } else {
                        let (mut ce, mut cs, mut prio) = (ce, cs, 0);
                        if je[ce].eval(p, 0) {
                            ce += 1;
                            if ce == je.len() {
                                ce = 0;
                                prio = 1;
                            }
                        }
                        if js[cs].eval(p, 0) {
                            cs += 1;
                            if cs == js.len() {
                                cs = 0;
                                prio = 2;
                            }
                        }
                        Node::Env { pos: p, ce, cs, prio }
                    };
                    out.push(id(target, &mut nodes, &mut succ, &mut stack));
                }
                if out.is_empty() {
                    out.push(id(Node::EnvWin, &mut nodes, &mut succ, &mut stack));
                }
            }
            Node::Env { pos, ce, cs, .. } => {
                for i in 0..1u64 << ni {
                    if holds(&spec.domain_e, i, 0) && holds(&tr_e, pos, i) {
                        out.push(id(Node::Sys { prev: Some(pos), input: i, ce, cs }, &mut nodes, &mut succ, &mut stack));
                    }
                }
                if out.is_empty() {
                    out.push(id(Node::SysWin, &mut nodes, &mut succ, &mut stack));
                }
            }
        }
        succ[k] = out;
    }
    let owner = nodes.iter().map(|n| if matches!(n, Node::Sys { .. }) { 0 } else { 1 }).collect();
    let prio = nodes
        .iter()
        .map(|n| match n {
            Node::SysWin => 2,
            Node::EnvWin => 1,
            Node::Env { prio, .. } => *prio,
            _ => 0,
        })
        .collect();
    let game = Parity { owner, prio, succ };
    let (w0, _) = game.zielonka(&vec![true; nodes.len()]);
    w0[0]
}

pub fn mix(seed: u64, parts: impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    parts.hash(&mut h);
    h.finish()
}

pub fn legal_inputs(spec: &Gr1Spec, prev: Option<u64>) -> Vec<u64> {
    (0..1u64 << spec.inputs.len())
        .filter(|&i| holds(&spec.domain_e, i, 0))
        .filter(|&i| match prev {
            None => holds(&spec.alpha_e, i, 0),
            Some(p) => holds(&transitions(&spec.beta_e), p, i),
        })
        .collect()
}

/// Runs the machine against a deterministic environment until a machine
/// state repeats; checks safety along the way and fairness on the cycle.
pub fn moore_lasso_ok(spec: &Gr1Spec, m: &reqlift_core::gr1::MooreMachine, seed: u64) -> Result<(), String> {
    let inv_e = invariants(&spec.beta_e);
    let mut state = m.initial();
    let mut prev: Option<u64> = None;
    let mut seen: HashMap<(usize, Option<u64>), usize> = HashMap::new();
    let mut trail: Vec<u64> = vec![];
    loop {
        if let Some(&start) = seen.get(&(state, prev)) {
            let cycle = &trail[start..];
            let env_fair = spec.gamma_e.iter().all(|g| cycle.iter().any(|&p| g.expr.eval(p, 0)));
            let sys_fair = spec.gamma_s.iter().all(|g| cycle.iter().any(|&p| g.expr.eval(p, 0)));
            return if !env_fair || sys_fair { Ok(()) } else { Err(format!("sys fairness starved on {cycle:?}")) };
        }
        seen.insert((state, prev), trail.len());
        let ins = legal_inputs(spec, prev);
        if ins.is_empty() {
            return Ok(());
        }
        let i = ins[(mix(seed, (state, prev)) % ins.len() as u64) as usize];
        state = m.step(state, i);
        let pos = spec.pack(i, m.outputs_of[state]);
        let bad = violations(spec, prev, pos);
        if !bad.is_empty() {
            return Err(format!("violated {bad:?} at step {}", trail.len()));
        }
        trail.push(pos);
        if !holds(&inv_e, pos, 0) {
            return Ok(());
        }
        prev = Some(pos);
    }
}

/// Plays the counterstrategy against a deterministic responder choosing
/// among legal replies; the play must break a system obligation or loop
/// while starving system fairness and keeping environment fairness.
pub fn counter_play_ok(spec: &Gr1Spec, cs: &reqlift_core::gr1::Counterstrategy, seed: u64) -> Result<(), String> {
    let inv_e = invariants(&spec.beta_e);
    let no = spec.outputs.len();
    let mut mem = cs.initial_memory();
    let mut input = cs.initial_input;
    let mut prev: Option<u64> = None;
    let mut seen: HashMap<(reqlift_core::gr1::CsMemory, Option<u64>), usize> = HashMap::new();
    let mut trail = vec![];
    let bound = cs.arena.len() + 1;
    loop {
        if let Some(&start) = seen.get(&(mem, prev)) {
            let cycle: &[u64] = &trail[start..];
            let env_fair = spec.gamma_e.iter().all(|g| cycle.iter().any(|&p| g.expr.eval(p, 0)));
            let sys_fair = spec.gamma_s.iter().all(|g| cycle.iter().any(|&p| g.expr.eval(p, 0)));
            return if env_fair && !sys_fair { Ok(()) } else { Err(format!("cycle {cycle:?} not losing for sys")) };
        }
        if trail.len() > bound && spec.gamma_s.is_empty() {
            return Err("no violation within bound".into());
        }
        seen.insert((mem, prev), trail.len());
        let legal: Vec<u64> = (0..1u64 << no).filter(|&o| violations(spec, prev, spec.pack(input, o)).is_empty()).collect();
        if legal.is_empty() {
            return Ok(());
        }
        let o = legal[(mix(seed, (mem, prev, input)) % legal.len() as u64) as usize];
        let pos = spec.pack(input, o);
        if !holds(&inv_e, pos, 0) {
            return Err(format!("environment broke its invariant at {pos}"));
        }
        if let Some(p) = prev {
            if !holds(&transitions(&spec.beta_e), p, input) {
                return Err("environment broke its transition".into());
            }
        }
        trail.push(pos);
        let (next, m2) = cs.next_move(&mem, o);
        mem = m2;
        prev = Some(pos);
        input = next;
    }
}

/// Random environment runs of `len` steps against the machine; returns the
/// first violated system obligation, if any.
pub fn simulate_moore(spec: &Gr1Spec, m: &reqlift_core::gr1::MooreMachine, runs: usize, len: usize, seed: u64) -> Result<(), String> {
    let inv_e = invariants(&spec.beta_e);
    let mut rng = StdRng::seed_from_u64(seed);
    for run in 0..runs {
        let mut state = m.initial();
        let mut prev = None;
        for t in 0..len {
            let ins = legal_inputs(spec, prev);
            if ins.is_empty() {
                break;
            }
            let i = ins[rng.gen_range(0..ins.len())];
            state = m.step(state, i);
            let pos = spec.pack(i, m.outputs_of[state]);
            let bad = violations(spec, prev, pos);
            if !bad.is_empty() {
                return Err(format!("run {run} step {t}: violated {bad:?}"));
            }
            if !holds(&inv_e, pos, 0) {
                break;
            }
            prev = Some(pos);
        }
    }
    Ok(())
}
