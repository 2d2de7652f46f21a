//! LTL to Büchi translation.
//!
//! A tableau over sets of obligations produces a transition-based generalized
//! Büchi automaton with one acceptance set per until subformula. It is
//! degeneralized per strongly connected component, trimmed and reduced by
//! merging bisimilar states.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{merge_bisimilar, scc, trim, BuchiAutomaton, Cocube, Literal, Prop};
use crate::discrete::LtlFormula;

type Id = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(Literal),
    And(Id, Id),
    Or(Id, Id),
    Next(Id),
    Until(Id, Id),
    Release(Id, Id),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    ids: HashMap<Node, Id>,
}

impl Arena {
    fn intern(&mut self, n: Node) -> Id {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n.clone());
        self.ids.insert(n, id);
        id
    }

    fn build(&mut self, f: &LtlFormula) -> Id {
        use LtlFormula as L;
        let node = match f {
            L::True => Node::True,
            L::False => Node::False,
            L::Bit(j) => Node::Lit(Literal::pos(Prop::Bit(*j))),
            L::Flow(c) => Node::Lit(Literal::pos(Prop::Flow(c.clone()))),
            L::Not(a) => match &**a {
                L::Bit(j) => Node::Lit(Literal::neg(Prop::Bit(*j))),
                L::Flow(c) => Node::Lit(Literal::neg(Prop::Flow(c.clone()))),
                _ => unreachable!("input is in NNF"),
            },
            L::And(a, b) => Node::And(self.build(a), self.build(b)),
            L::Or(a, b) => Node::Or(self.build(a), self.build(b)),
            L::Next(a) => Node::Next(self.build(a)),
            L::Until(a, b) => Node::Until(self.build(a), self.build(b)),
            L::Release(a, b) => Node::Release(self.build(a), self.build(b)),
        };
        self.intern(node)
    }

    /// Adds `id` to an obligation set, flattening conjunctions. Returns
    /// false if the set became unsatisfiable.
    fn oblige(&self, set: &mut BTreeSet<Id>, id: Id) -> bool {
        match &self.nodes[id as usize] {
            Node::True => true,
            Node::False => false,
            Node::And(a, b) => self.oblige(set, *a) && self.oblige(set, *b),
            _ => {
                set.insert(id);
                true
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Branch {
    label: BTreeSet<Literal>,
    next: BTreeSet<Id>,
    postponed: BTreeSet<Id>,
}

impl Branch {
    fn covers(&self, other: &Branch) -> bool {
        self.label.is_subset(&other.label) && self.next.is_subset(&other.next) && self.postponed.is_subset(&other.postponed)
    }
}

fn expand(arena: &Arena, state: &BTreeSet<Id>) -> Vec<Branch> {
    let mut out = Vec::new();
    let start = Branch {
        label: BTreeSet::new(),
        next: BTreeSet::new(),
        postponed: BTreeSet::new(),
    };
    let todo: Vec<Id> = state.iter().rev().copied().collect();
    expand_rec(arena, todo, BTreeSet::new(), start, &mut out);
    out.sort();
    out.dedup();
    let keep: Vec<bool> = (0..out.len())
        .map(|i| !(0..out.len()).any(|j| j != i && out[j].covers(&out[i]) && (!out[i].covers(&out[j]) || j < i)))
        .collect();
    out.into_iter().zip(keep).filter(|(_, k)| *k).map(|(b, _)| b).collect()
}

fn expand_rec(arena: &Arena, mut todo: Vec<Id>, mut done: BTreeSet<Id>, mut br: Branch, out: &mut Vec<Branch>) {
    while let Some(id) = todo.pop() {
        if !done.insert(id) {
            continue;
        }
        match &arena.nodes[id as usize] {
            Node::True => {}
            Node::False => return,
            Node::Lit(l) => {
                if br.label.contains(&l.complement()) {
                    return;
                }
                br.label.insert(l.clone());
            }
            Node::And(a, b) => {
                todo.push(*b);
                todo.push(*a);
            }
            Node::Or(a, b) => {
                let mut left = todo.clone();
                left.push(*a);
                expand_rec(arena, left, done.clone(), br.clone(), out);
                todo.push(*b);
            }
            Node::Next(a) => {
                if !arena.oblige(&mut br.next, *a) {
                    return;
                }
            }
            Node::Until(a, b) => {
                let mut now = todo.clone();
                now.push(*b);
                expand_rec(arena, now, done.clone(), br.clone(), out);
                br.next.insert(id);
                br.postponed.insert(id);
                todo.push(*a);
            }
            Node::Release(a, b) => {
                let mut now = todo.clone();
                now.push(*b);
                now.push(*a);
                expand_rec(arena, now, done.clone(), br.clone(), out);
                br.next.insert(id);
                todo.push(*b);
            }
        }
    }
    out.push(br);
}

/// Translates `formula` into a state-based Büchi automaton accepting exactly
/// the words that satisfy it.
pub fn ltl_to_buchi(formula: &LtlFormula) -> BuchiAutomaton {
    let nnf = formula.to_nnf();
    let mut arena = Arena::default();
    let root = arena.build(&nnf);

    // Generalized automaton over obligation sets.
    let mut init = BTreeSet::new();
    if !arena.oblige(&mut init, root) {
        return BuchiAutomaton::empty();
    }
    let mut states: Vec<BTreeSet<Id>> = vec![init.clone()];
    let mut index: HashMap<BTreeSet<Id>, usize> = HashMap::from([(init, 0)]);
    let mut edges: Vec<(usize, Cocube, usize, BTreeSet<Id>)> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        for br in expand(&arena, &states[s].clone()) {
            let d = *index.entry(br.next.clone()).or_insert_with(|| {
                states.push(br.next.clone());
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            edges.push((s, Cocube::new(br.label), d, br.postponed));
        }
    }

    // Degeneralization, one level counter per component.
    let n = states.len();
    let mut succ = vec![Vec::new(); n];
    for (s, _, d, _) in &edges {
        succ[*s].push(*d);
    }
    let comp = scc(n, &succ);
    let ncomp = comp.iter().max().map_or(0, |m| m + 1);
    let mut nontrivial = vec![false; ncomp];
    let mut relevant: Vec<BTreeSet<Id>> = vec![BTreeSet::new(); ncomp];
    for (s, _, d, post) in &edges {
        if comp[*s] == comp[*d] {
            nontrivial[comp[*s]] = true;
            relevant[comp[*s]].extend(post.iter().copied());
        }
    }
    let relevant: Vec<Vec<Id>> = relevant.into_iter().map(|r| r.into_iter().collect()).collect();
    let has_until = |s: usize| {
        states[s]
            .iter()
            .any(|&id| matches!(arena.nodes[id as usize], Node::Until(..)))
    };
    let top = |s: usize| if nontrivial[comp[s]] { relevant[comp[s]].len() } else { 0 };

    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut ba_states: Vec<(usize, usize)> = Vec::new();
    let mut ba_edges: Vec<(usize, Cocube, usize)> = Vec::new();
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (s, ..)) in edges.iter().enumerate() {
        out_edges[*s].push(i);
    }
    let mut work = VecDeque::new();
    let mut get = |key: (usize, usize), ba_states: &mut Vec<(usize, usize)>, work: &mut VecDeque<usize>| {
        *ids.entry(key).or_insert_with(|| {
            ba_states.push(key);
            work.push_back(ba_states.len() - 1);
            ba_states.len() - 1
        })
    };
    get((0, 0), &mut ba_states, &mut work);
    while let Some(b) = work.pop_front() {
        let (s, level) = ba_states[b];
        for &e in &out_edges[s] {
            let (_, cube, d, post) = &edges[e];
            let d_level = if comp[*d] != comp[s] || !nontrivial[comp[s]] {
                0
            } else {
                let rel = &relevant[comp[s]];
                let mut l = if level == rel.len() { 0 } else { level };
                while l < rel.len() && !post.contains(&rel[l]) {
                    l += 1;
                }
                l
            };
            let target = get((*d, d_level), &mut ba_states, &mut work);
            ba_edges.push((b, cube.clone(), target));
        }
    }
    let mut ba = BuchiAutomaton::new(ba_states.len(), 0).expect("nonempty");
    for (b, &(s, level)) in ba_states.iter().enumerate() {
        // Finality of a state outside any cycle is irrelevant to the
        // language; marking the ones without pending eventualities keeps
        // the output close to what other translators print.
        let fin = if nontrivial[comp[s]] { level == top(s) } else { !has_until(s) };
        ba.set_final(b, fin).expect("in range");
    }
    let mut dedup = BTreeSet::new();
    for (src, cube, dst) in ba_edges {
        if dedup.insert((src, cube.clone(), dst)) {
            ba.add_transition(src, cube.to_expr(), dst).expect("in range");
        }
    }
    merge_bisimilar(&drop_subsumed(&trim(&ba)))
}

/// Removes a transition when another one between the same states has a
/// weaker label.
fn drop_subsumed(aut: &BuchiAutomaton) -> BuchiAutomaton {
    let cubes = aut.cocube_transitions().expect("tableau labels are cocubes");
    let mut out = BuchiAutomaton::new(aut.num_states(), aut.initial()).expect("valid");
    for q in aut.finals() {
        out.set_final(q, true).expect("valid");
    }
    for (i, (s, c, d)) in cubes.iter().enumerate() {
        let redundant = cubes.iter().enumerate().any(|(j, (s2, c2, d2))| {
            j != i && s2 == s && d2 == d && c2.is_subset(c) && (c2 != c || j < i)
        });
        if !redundant {
            out.add_transition(*s, c.to_expr(), *d).expect("valid");
        }
    }
    out
}
