//! Accepting-cycle search: nested depth-first search, a transitive-closure
//! cross-check, and word acceptance for Büchi automata.

use std::collections::HashSet;
use std::hash::Hash;

use crate::buchi::{compile_label, BuchiAutomaton, CompiledCube};
use crate::discrete::DiscreteWord;

/// Nested depth-first search for a reachable cycle through an accepting
/// node. Both searches are iterative.
pub fn nested_dfs<N, S, A>(init: N, succ: S, accepting: A) -> bool
where
    N: Copy + Eq + Hash,
    S: Fn(N) -> Vec<N>,
    A: Fn(N) -> bool,
{
    let mut blue: HashSet<N> = HashSet::new();
    let mut red: HashSet<N> = HashSet::new();
    let mut stack: Vec<(N, Vec<N>, usize)> = Vec::new();
    blue.insert(init);
    stack.push((init, succ(init), 0));
    while let Some(top) = stack.last_mut() {
        if top.2 < top.1.len() {
            let m = top.1[top.2];
            top.2 += 1;
            if blue.insert(m) {
                let next = succ(m);
                stack.push((m, next, 0));
            }
            continue;
        }
        let (n, _, _) = stack.pop().expect("nonempty");
        if accepting(n) && red_search(n, &succ, &mut red) {
            return true;
        }
    }
    false
}

fn red_search<N, S>(seed: N, succ: &S, red: &mut HashSet<N>) -> bool
where
    N: Copy + Eq + Hash,
    S: Fn(N) -> Vec<N>,
{
    let mut stack = vec![seed];
    while let Some(n) = stack.pop() {
        for m in succ(n) {
            if m == seed {
                return true;
            }
            if red.insert(m) {
                stack.push(m);
            }
        }
    }
    false
}

/// Per-state successors over labels that some letter satisfies.
fn satisfiable_successors(aut: &BuchiAutomaton) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); aut.num_states()];
    for t in aut.transitions() {
        if t.label.dnf().iter().any(|c| !c.is_contradictory()) && !succ[t.src].contains(&t.dst) {
            succ[t.src].push(t.dst);
        }
    }
    succ
}

/// The automaton accepts no infinite word. Flow atoms are independent
/// propositions, so a label is satisfiable iff one of its cubes is free of
/// complementary literals.
pub fn buchi_empty(aut: &BuchiAutomaton) -> bool {
    let succ = satisfiable_successors(aut);
    !nested_dfs(aut.initial(), |q| succ[q].clone(), |q| aut.is_final(q))
}

/// Emptiness via strongly connected components: nonempty iff a component
/// reachable from the initial state holds a final state and a cycle.
pub fn buchi_empty_scc(aut: &BuchiAutomaton) -> bool {
    let succ = satisfiable_successors(aut);
    let n = aut.num_states();
    let mut reachable = vec![false; n];
    let mut stack = vec![aut.initial()];
    reachable[aut.initial()] = true;
    while let Some(q) = stack.pop() {
        for &d in &succ[q] {
            if !reachable[d] {
                reachable[d] = true;
                stack.push(d);
            }
        }
    }
    let comp = tarjan(&succ);
    !(0..n).any(|q| {
        reachable[q] && aut.is_final(q) && succ[q].iter().any(|&d| comp[d] == comp[q])
    })
}

/// Component index per node, by Tarjan's algorithm without recursion.
fn tarjan(succ: &[Vec<usize>]) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut comps = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if let Some(&w) = succ[v].get(*i) {
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(u, _)) = work.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("component member");
                    on_stack[w] = false;
                    comp[w] = comps;
                    if w == v {
                        break;
                    }
                }
                comps += 1;
            }
        }
    }
    comp
}

/// Labels compiled once for repeated acceptance queries over one universe.
pub struct CompiledBuchi<'a> {
    aut: &'a BuchiAutomaton,
    /// `(dst, cubes)` per source state.
    succ: Vec<Vec<(usize, Vec<CompiledCube>)>>,
}

impl<'a> CompiledBuchi<'a> {
    pub fn new(aut: &'a BuchiAutomaton, universe: &crate::oracle::Universe) -> Self {
        let mut succ = vec![Vec::new(); aut.num_states()];
        for t in aut.transitions() {
            succ[t.src].push((t.dst, compile_label(&t.label, universe)));
        }
        CompiledBuchi { aut, succ }
    }

    /// Lasso product of the automaton and `w`, searched for an accepting cycle.
    pub fn accepts(&self, w: &DiscreteWord) -> bool {
        let letters: Vec<_> = (0..w.len()).map(|p| w.letter(p)).collect();
        let succ = |(q, p): (usize, usize)| -> Vec<(usize, usize)> {
            let np = w.succ(p);
            self.succ[q]
                .iter()
                .filter(|(_, cubes)| cubes.iter().any(|c| c.matches(letters[p])))
                .map(|(d, _)| (*d, np))
                .collect()
        };
        nested_dfs((self.aut.initial(), 0), succ, |(q, _)| self.aut.is_final(q))
    }
}

/// `w ∈ L(aut)`.
pub fn buchi_accepts(aut: &BuchiAutomaton, w: &DiscreteWord) -> bool {
    CompiledBuchi::new(aut, w.universe()).accepts(w)
}
