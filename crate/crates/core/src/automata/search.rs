use std::collections::HashSet;
use std::hash::Hash;

/// Nested depth-first search for a reachable accepting cycle. Returns the
/// stem (ending just before the cycle entry) and the cycle (starting at an
/// accepting state).
pub fn nested_dfs<S, F, A>(init: &[S], succ: F, accepting: A) -> Option<(Vec<S>, Vec<S>)>
where
    S: Clone + Eq + Hash,
    F: Fn(S) -> Vec<S>,
    A: Fn(&S) -> bool,
{
    let mut outer_seen: HashSet<S> = HashSet::new();
    let mut inner_seen: HashSet<S> = HashSet::new();
    for s0 in init {
        if !outer_seen.insert(s0.clone()) {
            continue;
        }
        let mut stack: Vec<(S, Vec<S>)> = vec![(s0.clone(), succ(s0.clone()))];
        while let Some((s, pending)) = stack.last_mut() {
            if let Some(t) = pending.pop() {
                if outer_seen.insert(t.clone()) {
                    let next = succ(t.clone());
                    stack.push((t, next));
                }
                continue;
            }
            let seed = s.clone();
            if accepting(&seed) {
                if let Some(cycle) = inner(&seed, &succ, &mut inner_seen) {
                    let stem: Vec<S> = stack[..stack.len() - 1].iter().map(|(s, _)| s.clone()).collect();
                    return Some((stem, cycle));
                }
            }
            stack.pop();
        }
    }
    None
}

fn inner<S, F>(seed: &S, succ: &F, seen: &mut HashSet<S>) -> Option<Vec<S>>
where
    S: Clone + Eq + Hash,
    F: Fn(S) -> Vec<S>,
{
    let mut stack: Vec<(S, Vec<S>)> = vec![(seed.clone(), succ(seed.clone()))];
    while let Some((_, pending)) = stack.last_mut() {
        match pending.pop() {
            Some(t) if t == *seed => return Some(stack.iter().map(|(s, _)| s.clone()).collect()),
            Some(t) => {
                if seen.insert(t.clone()) {
                    let next = succ(t.clone());
                    stack.push((t, next));
                }
            }
            None => {
                stack.pop();
            }
        }
    }
    None
}
