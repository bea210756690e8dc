use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::automata::ResourceError;

use super::arena::{Arena, Move};
use super::{Conjunct, Gr1Spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_bits: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_bits: 24 }
    }
}

type Set = Vec<bool>;

fn goals(cs: &[Conjunct], arena: &Arena) -> Vec<Set> {
    if cs.is_empty() {
        return vec![vec![true; arena.len()]];
    }
    cs.iter().map(|c| arena.positions.iter().map(|&p| c.expr.eval(p, 0)).collect()).collect()
}

/// Positions where every environment move has a reply into `s`.
fn cpre(arena: &Arena, s: &Set) -> Set {
    (0..arena.len())
        .map(|p| arena.env_dead[p] || arena.moves[p].iter().all(|m| m.replies.iter().any(|&q| s[q])))
        .collect()
}

/// Positions with an environment move all of whose replies land in `s`.
fn epre(arena: &Arena, s: &Set) -> Set {
    (0..arena.len())
        .map(|p| !arena.env_dead[p] && arena.moves[p].iter().any(|m| m.replies.iter().all(|&q| s[q])))
        .collect()
}

const NONE: (u32, u32) = (u32::MAX, u32::MAX);

struct SysSolution {
    win: Set,
    /// Per system goal, the first (rank, env goal) claiming each position.
    info: Vec<Vec<(u32, u32)>>,
}

fn solve_sys(arena: &Arena, js: &[Set], je: &[Set]) -> SysSolution {
    let n = arena.len();
    let mut z = vec![true; n];
    loop {
        let mut z_new = vec![true; n];
        let mut info = Vec::with_capacity(js.len());
        let cz = cpre(arena, &z);
        for jsj in js {
            let mut y = vec![false; n];
            let mut claim = vec![NONE; n];
            let mut r = 0u32;
            loop {
                r += 1;
                let cy = cpre(arena, &y);
                let mut acc = vec![false; n];
                for (i, jei) in je.iter().enumerate() {
                    let mut x = z.clone();
                    loop {
                        let cx = cpre(arena, &x);
                        let nx: Set = (0..n).map(|p| (jsj[p] && cz[p]) || cy[p] || (!jei[p] && cx[p])).collect();
                        if nx == x {
                            break;
                        }
                        x = nx;
                    }
                    for p in 0..n {
                        if x[p] {
                            acc[p] = true;
                            if claim[p] == NONE {
                                claim[p] = (r, i as u32);
                            }
                        }
                    }
                }
                if acc == y {
                    break;
                }
                y = acc;
            }
            for p in 0..n {
                z_new[p] &= y[p];
            }
            info.push(claim);
        }
        if z_new == z {
            return SysSolution { win: z, info };
        }
        z = z_new;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct EnvSolution {
    /// Layer of each position, `u32::MAX` for system-winning positions.
    layer: Vec<u32>,
    goal: Vec<u32>,
    /// `[layer][sys goal]` membership of the trap set.
    trap: Vec<Vec<Set>>,
    /// `[layer][sys goal][env goal]` attractor rank, `u32::MAX` outside.
    rank: Vec<Vec<Vec<Vec<u32>>>>,
}

fn solve_env(arena: &Arena, js: &[Set], je: &[Set]) -> EnvSolution {
    let n = arena.len();
    let mut zb = vec![false; n];
    let mut layer = vec![u32::MAX; n];
    let mut goal = vec![u32::MAX; n];
    let mut trap = vec![];
    let mut rank = vec![];
    loop {
        let k = trap.len() as u32;
        let ez = epre(arena, &zb);
        let mut layer_traps = Vec::new();
        let mut layer_ranks = Vec::new();
        for jsj in js {
            let mut yb = vec![true; n];
            let mut ranks;
            loop {
                let ey = epre(arena, &yb);
                let mut acc = vec![true; n];
                ranks = Vec::with_capacity(je.len());
                for jei in je {
                    let mut x = vec![false; n];
                    let mut rk = vec![u32::MAX; n];
                    let mut m = 0;
                    loop {
                        m += 1;
                        let ex = epre(arena, &x);
                        let nx: Set = (0..n).map(|p| (!jsj[p] || ez[p]) && ey[p] && (jei[p] || ex[p])).collect();
                        if nx == x {
                            break;
                        }
                        for p in 0..n {
                            if nx[p] && rk[p] == u32::MAX {
                                rk[p] = m;
                            }
                        }
                        x = nx;
                    }
                    for p in 0..n {
                        acc[p] &= x[p];
                    }
                    ranks.push(rk);
                }
                if acc == yb {
                    break;
                }
                yb = acc;
            }
            layer_traps.push(yb);
            layer_ranks.push(ranks);
        }
        let mut grew = false;
        for (j, yb) in layer_traps.iter().enumerate() {
            for p in 0..n {
                if yb[p] && !zb[p] {
                    zb[p] = true;
                    layer[p] = k;
                    goal[p] = j as u32;
                    grew = true;
                }
            }
        }
        trap.push(layer_traps);
        rank.push(layer_ranks);
        if !grew {
            return EnvSolution { layer, goal, trap, rank };
        }
    }
}

/// Finite-state implementation: reads an input valuation, moves, and
/// outputs the valuation attached to the new state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MooreMachine {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// State 0 is the reset state, state 1 the sink entered when the
    /// environment breaks its assumptions.
    pub outputs_of: Vec<u64>,
    /// `[state][input valuation]`.
    pub next: Vec<Vec<usize>>,
    /// Arena position and goal index of each ordinary state.
    pub positions: Vec<Option<(u64, usize)>>,
}

pub const RESET: usize = 0;
pub const SINK: usize = 1;

impl MooreMachine {
    pub fn initial(&self) -> usize {
        RESET
    }

    pub fn step(&self, state: usize, input: u64) -> usize {
        self.next[state][input as usize]
    }

    pub fn len(&self) -> usize {
        self.outputs_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs_of.is_empty()
    }

    fn bits_text(names: &[String], v: u64) -> String {
        names.iter().enumerate().filter(|(i, _)| v >> i & 1 == 1).map(|(_, n)| n.as_str()).collect::<Vec<_>>().join(" ")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph moore {\n");
        for (s, o) in self.outputs_of.iter().enumerate() {
            let name = match s {
                RESET => "reset".to_string(),
                SINK => "sink".to_string(),
                _ => format!("s{s}"),
            };
            let _ = writeln!(out, "  {s} [label=\"{name}\\n{}\"];", Self::bits_text(&self.outputs, *o));
        }
        for (s, row) in self.next.iter().enumerate() {
            let mut by_target: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
            for (i, t) in row.iter().enumerate() {
                by_target.entry(*t).or_default().push(i as u64);
            }
            for (t, ins) in by_target {
                let _ = writeln!(out, "  {s} -> {t} [label=\"{} inputs\"];", ins.len());
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = self
            .outputs_of
            .iter()
            .enumerate()
            .map(|(s, o)| {
                let outs: BTreeMap<&str, bool> =
                    self.outputs.iter().enumerate().map(|(i, n)| (n.as_str(), o >> i & 1 == 1)).collect();
                serde_json::json!({ "state": s, "outputs": outs, "next": self.next[s] })
            })
            .collect();
        serde_json::json!({ "inputs": self.inputs, "outputs": self.outputs, "initial": RESET, "sink": SINK, "states": states })
    }
}

/// Environment memory: the last input played plus the layer, system goal
/// and environment-goal cursor being pursued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CsMemory {
    pub input: u64,
    pub layer: u32,
    pub goal: u32,
    pub cursor: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterstrategy {
    pub spec: Gr1Spec,
    pub arena: Arena,
    pub initial_input: u64,
    env: EnvSolution,
    js: Vec<Set>,
    je: Vec<Set>,
}

impl Counterstrategy {
    pub fn initial_memory(&self) -> CsMemory {
        CsMemory { input: self.initial_input, layer: u32::MAX, goal: 0, cursor: 0 }
    }

    fn fallback(&self, mem: &CsMemory) -> (u64, CsMemory) {
        let input = self.arena.initial.first().map(|m| m.input).unwrap_or(0);
        (input, CsMemory { input, ..*mem })
    }

    fn pick(&self, moves: &[Move], ok: impl Fn(usize) -> bool) -> Option<u64> {
        moves.iter().find(|m| m.replies.iter().all(|&q| ok(q))).map(|m| m.input)
    }

    /// Environment reply to the system's output for the current input.
    pub fn next_move(&self, mem: &CsMemory, output: u64) -> (u64, CsMemory) {
        let pos = self.spec.pack(mem.input, output);
        let Some(&p) = self.arena.index.get(&pos) else { return self.fallback(mem) };
        let env = &self.env;
        if env.layer[p] == u32::MAX {
            return self.fallback(mem);
        }
        let mut m = *mem;
        if env.layer[p] < m.layer || m.layer == u32::MAX {
            m.layer = env.layer[p];
            m.goal = env.goal[p];
        }
        let (k, j, i) = (m.layer as usize, m.goal as usize, m.cursor as usize);
        let moves = &self.arena.moves[p];
        let lower = |q: usize| env.layer[q] < k as u32;
        let choice = if self.js[j][p] {
            self.pick(moves, lower)
        } else if self.je[i][p] {
            m.cursor = ((i + 1) % self.je.len()) as u32;
            self.pick(moves, |q| env.trap[k][j][q] || lower(q))
        } else {
            let r = env.rank[k][j][i][p];
            self.pick(moves, |q| env.rank[k][j][i][q] < r || lower(q))
        };
        match choice {
            Some(input) => {
                m.input = input;
                (input, m)
            }
            None => self.fallback(mem),
        }
    }

    /// Plays graph: nodes are (memory, position) pairs reachable when the
    /// system answers with any legal reply. Returns nodes, successor lists
    /// and initial node indices.
    pub fn plays(&self) -> (Vec<(CsMemory, usize)>, Vec<Vec<usize>>, Vec<usize>) {
        let mut nodes: Vec<(CsMemory, usize)> = Vec::new();
        let mut index: BTreeMap<(CsMemory, usize), usize> = BTreeMap::new();
        let mut succ: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut intern = |n: (CsMemory, usize), nodes: &mut Vec<(CsMemory, usize)>, succ: &mut Vec<Vec<usize>>, queue: &mut VecDeque<usize>| {
            *index.entry(n).or_insert_with(|| {
                nodes.push(n);
                succ.push(Vec::new());
                queue.push_back(nodes.len() - 1);
                nodes.len() - 1
            })
        };
        let mem0 = self.initial_memory();
        let mut initial = Vec::new();
        if let Some(m0) = self.arena.initial.iter().find(|m| m.input == self.initial_input) {
            for &q in &m0.replies {
                initial.push(intern((mem0, q), &mut nodes, &mut succ, &mut queue));
            }
        }
        while let Some(k) = queue.pop_front() {
            let (mem, p) = nodes[k];
            let (_, out) = self.spec.split(self.arena.positions[p]);
            let (input, next_mem) = self.next_move(&mem, out);
            let targets: Vec<usize> = self.arena.moves[p]
                .iter()
                .filter(|m| m.input == input)
                .flat_map(|m| m.replies.clone())
                .collect();
            let mut out_nodes = Vec::new();
            for q in targets {
                out_nodes.push(intern((next_mem, q), &mut nodes, &mut succ, &mut queue));
            }
            succ[k] = out_nodes;
        }
        (nodes, succ, initial)
    }

    /// Every reachable memory value.
    pub fn memory_states(&self) -> BTreeSet<CsMemory> {
        self.plays().0.into_iter().map(|(m, _)| m).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Realizability {
    Realizable(MooreMachine),
    Unrealizable(Box<Counterstrategy>),
}

impl Realizability {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Realizability::Realizable(_))
    }
}

fn better(a: (u32, u32), b: (u32, u32)) -> bool {
    a < b
}

fn extract_machine(spec: &Gr1Spec, arena: &Arena, sol: &SysSolution, js: &[Set]) -> MooreMachine {
    let ni = spec.inputs.len();
    let k = js.len();
    let best = |replies: &[usize], goal: usize| -> Option<usize> {
        let mut pick: Option<usize> = None;
        for &q in replies {
            if !sol.win[q] {
                continue;
            }
            if pick.is_none_or(|b| better(sol.info[goal][q], sol.info[goal][b])) {
                pick = Some(q);
            }
        }
        pick
    };
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut outputs_of = vec![0, 0];
    let mut positions = vec![None, None];
    let mut next: Vec<Vec<usize>> = vec![vec![SINK; 1 << ni], vec![SINK; 1 << ni]];
    let mut queue = VecDeque::new();
    let mut intern = |q: usize, j: usize, outputs_of: &mut Vec<u64>, positions: &mut Vec<Option<(u64, usize)>>, next: &mut Vec<Vec<usize>>, queue: &mut VecDeque<usize>| {
        *index.entry((q, j)).or_insert_with(|| {
            let s = outputs_of.len();
            outputs_of.push(spec.split(arena.positions[q]).1);
            positions.push(Some((arena.positions[q], j)));
            next.push(vec![SINK; 1 << ni]);
            queue.push_back(s);
            s
        })
    };
    for m in &arena.initial {
        if let Some(q) = best(&m.replies, 0) {
            let s = intern(q, 0, &mut outputs_of, &mut positions, &mut next, &mut queue);
            next[RESET][m.input as usize] = s;
        }
    }
    while let Some(s) = queue.pop_front() {
        let (pos, j) = positions[s].expect("ordinary state");
        let p = arena.index[&pos];
        let j2 = if js[j][p] { (j + 1) % k } else { j };
        for m in &arena.moves[p] {
            let goal = if js[j][p] { j2 } else { j };
            if let Some(q) = best(&m.replies, goal) {
                let t = intern(q, j2, &mut outputs_of, &mut positions, &mut next, &mut queue);
                next[s][m.input as usize] = t;
            }
        }
    }
    MooreMachine { inputs: spec.inputs.clone(), outputs: spec.outputs.clone(), outputs_of, next, positions }
}

pub fn check_realizability(spec: &Gr1Spec, opts: &SolveOptions) -> Result<Realizability, ResourceError> {
    if spec.bits() > opts.max_bits {
        return Err(ResourceError::TooManyBits { bits: spec.bits(), cap: opts.max_bits });
    }
    let arena = Arena::build(spec);
    let js = goals(&spec.gamma_s, &arena);
    let je = goals(&spec.gamma_e, &arena);
    let sol = solve_sys(&arena, &js, &je);
    let losing = arena.initial.iter().find(|m| !m.replies.iter().any(|&q| sol.win[q]));
    match losing {
        None => Ok(Realizability::Realizable(extract_machine(spec, &arena, &sol, &js))),
        Some(m) => {
            let initial_input = m.input;
            let env = solve_env(&arena, &js, &je);
            debug_assert!((0..arena.len()).all(|p| (env.layer[p] == u32::MAX) == sol.win[p]));
            Ok(Realizability::Unrealizable(Box::new(Counterstrategy {
                spec: spec.clone(),
                arena,
                initial_input,
                env,
                js,
                je,
            })))
        }
    }
}
