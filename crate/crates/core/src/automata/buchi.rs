use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ltl::{Ltl, Style};

use super::prop::{eval_in, sat, Valuation};

/// An edge reads any letter satisfying `label`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Ltl,
}

/// Büchi automaton with propositional edge labels and state acceptance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuchiAutomaton {
    pub props: BTreeSet<String>,
    /// Obligation text of each state, for display.
    pub states: Vec<String>,
    pub initial: Vec<usize>,
    pub accepting: BTreeSet<usize>,
    pub edges: Vec<Edge>,
}

impl BuchiAutomaton {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty_automaton(&self) -> bool {
        self.states.is_empty()
    }

    pub fn out_edges(&self, q: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == q)
    }

    pub fn delta(&self, q: usize, letter: &Valuation) -> Vec<usize> {
        let lookup = |p: &str| Some(letter.get(p).copied().unwrap_or(false));
        self.out_edges(q).filter(|e| super::prop::eval(&e.label, &lookup) == Some(true)).map(|e| e.to).collect()
    }

    pub fn successor_lists(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for e in &self.edges {
            if !out[e.from].contains(&e.to) {
                out[e.from].push(e.to);
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph buchi {\n  rankdir=LR;\n  init [shape=point];\n");
        for (i, s) in self.states.iter().enumerate() {
            let shape = if self.accepting.contains(&i) { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  q{i} [shape={shape}, tooltip=\"{}\"];", s.replace('"', "'"));
        }
        for q in &self.initial {
            let _ = writeln!(out, "  init -> q{q};");
        }
        for e in &self.edges {
            let label = e.label.to_styled(Style::Compact).replace('"', "'");
            let _ = writeln!(out, "  q{} -> q{} [label=\"{label}\"];", e.from, e.to);
        }
        out.push_str("}\n");
        out
    }
}

/// Negation normal form over temporal structure; temporal-free subformulas
/// stay whole.
pub fn nnf(f: &Ltl) -> Ltl {
    fn go(f: &Ltl, neg: bool) -> Ltl {
        if !f.is_temporal() {
            return if neg { Ltl::not(f.clone()) } else { f.clone() };
        }
        match f {
            Ltl::Not(a) => go(a, !neg),
            Ltl::And(cs) => {
                let kids = cs.iter().map(|c| go(c, neg)).collect();
                if neg { Ltl::or(kids) } else { Ltl::and(kids) }
            }
            Ltl::Or(cs) => {
                let kids = cs.iter().map(|c| go(c, neg)).collect();
                if neg { Ltl::and(kids) } else { Ltl::or(kids) }
            }
            Ltl::Implies(a, b) => go(&Ltl::or(vec![Ltl::not((**a).clone()), (**b).clone()]), neg),
            Ltl::Next(a) => Ltl::next(go(a, neg)),
            Ltl::Globally(a) => {
                if neg { Ltl::finally(go(a, true)) } else { Ltl::globally(go(a, false)) }
            }
            Ltl::Finally(a) => {
                if neg { Ltl::globally(go(a, true)) } else { Ltl::finally(go(a, false)) }
            }
            _ => unreachable!("atoms are temporal-free"),
        }
    }
    go(f, false)
}

#[derive(Debug, Clone)]
struct Node {
    label: Vec<Ltl>,
    next: BTreeSet<Ltl>,
    promised: BTreeSet<Ltl>,
    fulfilled: BTreeSet<Ltl>,
}

fn expand(todo: Vec<Ltl>) -> Vec<Node> {
    let mut done = Vec::new();
    let mut stack = vec![(
        todo,
        Node { label: Vec::new(), next: BTreeSet::new(), promised: BTreeSet::new(), fulfilled: BTreeSet::new() },
    )];
    while let Some((mut todo, mut node)) = stack.pop() {
        let Some(f) = todo.pop() else {
            done.push(node);
            continue;
        };
        if !f.is_temporal() {
            if f != Ltl::True {
                node.label.push(f);
            }
            stack.push((todo, node));
            continue;
        }
        match f {
            Ltl::And(cs) => {
                todo.extend(cs);
                stack.push((todo, node));
            }
            Ltl::Or(cs) => {
                for c in cs.into_iter().rev() {
                    let mut t = todo.clone();
                    t.push(c);
                    stack.push((t, node.clone()));
                }
            }
            Ltl::Next(a) => {
                node.next.insert(*a);
                stack.push((todo, node));
            }
            Ltl::Globally(ref a) => {
                todo.push((**a).clone());
                node.next.insert(f.clone());
                stack.push((todo, node));
            }
            Ltl::Finally(ref a) => {
                node.promised.insert(f.clone());
                let mut later = node.clone();
                later.next.insert(f.clone());
                stack.push((todo.clone(), later));
                let mut now = node;
                now.fulfilled.insert(f.clone());
                let mut t = todo;
                t.push((**a).clone());
                stack.push((t, now));
            }
            other => unreachable!("not in normal form: {other}"),
        }
    }
    done
}

fn eventualities(f: &Ltl) -> Vec<Ltl> {
    let set: BTreeSet<Ltl> = f.subtrees().into_iter().filter(|s| matches!(s, Ltl::Finally(_))).cloned().collect();
    set.into_iter().collect()
}

/// Tableau construction. States are obligation sets for the future paired
/// with a counter over the eventualities still awaited.
pub fn ltl_to_buchi(f: &Ltl) -> BuchiAutomaton {
    let f = nnf(f);
    let evs = eventualities(&f);
    let k = evs.len();
    let props = f.props();
    let mut index: BTreeMap<(BTreeSet<Ltl>, usize), usize> = BTreeMap::new();
    let mut states = Vec::new();
    let mut accepting = BTreeSet::new();
    let mut queue = VecDeque::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut expansions: BTreeMap<BTreeSet<Ltl>, Vec<(Ltl, BTreeSet<Ltl>, Vec<bool>)>> = BTreeMap::new();

    let mut intern = |key: (BTreeSet<Ltl>, usize), states: &mut Vec<String>, queue: &mut VecDeque<usize>| {
        if let Some(&i) = index.get(&key) {
            return i;
        }
        let i = states.len();
        let text: Vec<String> = key.0.iter().map(|g| g.to_styled(Style::Compact)).collect();
        states.push(format!("{{{}}} #{}", text.join(", "), key.1));
        if key.1 == k {
            accepting.insert(i);
        }
        index.insert(key.clone(), i);
        queue.push_back(i);
        i
    };
    let start: BTreeSet<Ltl> = BTreeSet::from([f.clone()]);
    let q0 = intern((start, 0), &mut states, &mut queue);
    let mut keys: Vec<(BTreeSet<Ltl>, usize)> = vec![(BTreeSet::from([f]), 0)];
    while let Some(q) = queue.pop_front() {
        let (obligations, counter) = keys[q].clone();
        let succ = expansions.entry(obligations.clone()).or_insert_with(|| {
            expand(obligations.iter().cloned().collect())
                .into_iter()
                .filter_map(|n| {
                    let label = Ltl::and(n.label);
                    sat(&label)?;
                    let acc = evs.iter().map(|e| !n.promised.contains(e) || n.fulfilled.contains(e)).collect();
                    Some((label, n.next, acc))
                })
                .collect()
        });
        for (label, next, acc) in succ.clone() {
            let mut c = if counter == k { 0 } else { counter };
            while c < k && acc[c] {
                c += 1;
            }
            let before = states.len();
            let to = intern((next.clone(), c), &mut states, &mut queue);
            if states.len() > before {
                keys.push((next, c));
            }
            let edge = Edge { from: q, to, label };
            if !edges.contains(&edge) {
                edges.push(edge);
            }
        }
    }
    BuchiAutomaton { props, states, initial: vec![q0], accepting, edges }
}

/// Whether the letter sequence `prefix (cycle)^ω` is accepted.
pub fn accepts(a: &BuchiAutomaton, prefix: &[Valuation], cycle: &[Valuation]) -> bool {
    let word: Vec<&Valuation> = prefix.iter().chain(cycle).collect();
    let n = word.len();
    let loop_start = prefix.len();
    let next_pos = |i: usize| if i + 1 == n { loop_start } else { i + 1 };
    // Product graph over (position, state).
    let succ = |(i, q): (usize, usize)| -> Vec<(usize, usize)> {
        a.delta(q, word[i]).into_iter().map(|r| (next_pos(i), r)).collect()
    };
    let init: Vec<(usize, usize)> = a.initial.iter().map(|&q| (0, q)).collect();
    super::search::nested_dfs(&init, succ, |&(_, q)| a.accepting.contains(&q)).is_some()
}

/// Evaluates a propositional edge label under a complete letter.
pub fn label_holds(label: &Ltl, letter: &Valuation) -> bool {
    eval_in(label, letter).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse;

    fn letter(p: bool) -> Valuation {
        Valuation::from([("p".to_string(), p)])
    }

    #[test]
    fn globally_is_one_state() {
        let a = ltl_to_buchi(&parse("G(p)").unwrap());
        assert_eq!(a.len(), 1);
        assert_eq!(a.edges, vec![Edge { from: 0, to: 0, label: Ltl::prop("p") }]);
        assert!(a.accepting.contains(&0));
    }

    #[test]
    fn finally_is_two_states_with_accepting_sink() {
        let a = ltl_to_buchi(&parse("F(p)").unwrap());
        assert_eq!(a.len(), 2);
        assert!(!a.accepting.contains(&0));
        assert!(a.accepting.contains(&1));
        assert!(a.edges.contains(&Edge { from: 0, to: 1, label: Ltl::prop("p") }));
        assert!(a.edges.contains(&Edge { from: 1, to: 1, label: Ltl::True }));
        assert!(accepts(&a, &[letter(false), letter(true)], &[letter(false)]));
        assert!(!accepts(&a, &[], &[letter(false)]));
    }

    #[test]
    fn contradiction_has_no_edges() {
        let a = ltl_to_buchi(&parse("p AND NOT(p)").unwrap());
        assert!(a.edges.is_empty());
    }

    #[test]
    fn dot_lists_states() {
        let dot = ltl_to_buchi(&parse("F(p)").unwrap()).to_dot();
        assert!(dot.contains("q1 [shape=doublecircle"));
        assert!(dot.contains("q0 -> q1 [label=\"p\"]"));
    }
}
