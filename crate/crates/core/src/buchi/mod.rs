//! State-based Büchi automata over `AP = FC ∪ {b0, …}` and their labels.

mod hoa;
mod tableau;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::constraint::FlowConstraint;
use crate::discrete::{ActionEncoding, Letter};
use crate::oracle::trace::Universe;
use crate::syntax::ParseError;

pub use hoa::{export_hoa, import_hoa};
pub use tableau::ltl_to_buchi;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuchiError {
    #[error("HOA syntax error at {0}")]
    Syntax(ParseError),
    #[error("unsupported acceptance condition `{0}`; only state-based Büchi is supported")]
    UnsupportedAcceptance(String),
    #[error("automaton must have exactly one initial state, found {0}")]
    InitialStates(usize),
    #[error("unsupported HOA feature: {0}")]
    Unsupported(String),
    #[error("state {0} is out of range")]
    StateOutOfRange(usize),
    #[error("negated flow atom `{0}` in a label; only positive-flow automata are supported")]
    NegativeFlow(String),
}

impl From<ParseError> for BuchiError {
    fn from(e: ParseError) -> Self {
        BuchiError::Syntax(e)
    }
}

/// Atomic proposition. Bits sort before flow atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prop {
    Bit(u32),
    Flow(FlowConstraint),
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::Bit(j) => write!(f, "b{j}"),
            Prop::Flow(c) => write!(f, "\"{c}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub prop: Prop,
    pub positive: bool,
}

impl Literal {
    pub fn pos(prop: Prop) -> Self {
        Literal { prop, positive: true }
    }

    pub fn neg(prop: Prop) -> Self {
        Literal { prop, positive: false }
    }

    pub fn complement(&self) -> Self {
        Literal {
            prop: self.prop.clone(),
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        write!(f, "{}", self.prop)
    }
}

/// Conjunction of literals stored as a sorted set; the empty cocube is `true`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cocube(BTreeSet<Literal>);

impl Cocube {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Self {
        Cocube(lits.into_iter().collect())
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.0.contains(l)
    }

    pub fn insert(&mut self, l: Literal) {
        self.0.insert(l);
    }

    pub fn is_subset(&self, other: &Cocube) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Some proposition occurs with both polarities.
    pub fn is_contradictory(&self) -> bool {
        self.0.iter().any(|l| !l.positive && self.0.contains(&l.complement()))
    }

    /// `(required true, required false)` bit masks.
    pub fn bit_masks(&self) -> (u32, u32) {
        let mut pos = 0;
        let mut neg = 0;
        for l in &self.0 {
            if let Prop::Bit(j) = l.prop {
                if l.positive {
                    pos |= 1 << j;
                } else {
                    neg |= 1 << j;
                }
            }
        }
        (pos, neg)
    }

    /// The bit literals do not contradict the letter mask `bits`.
    pub fn consistent_with_bits(&self, bits: u32) -> bool {
        let (pos, neg) = self.bit_masks();
        pos & !bits == 0 && neg & bits == 0
    }

    pub fn positive_flows(&self) -> BTreeSet<FlowConstraint> {
        self.flows(true)
    }

    pub fn negative_flows(&self) -> BTreeSet<FlowConstraint> {
        self.flows(false)
    }

    fn flows(&self, positive: bool) -> BTreeSet<FlowConstraint> {
        self.0
            .iter()
            .filter(|l| l.positive == positive)
            .filter_map(|l| match &l.prop {
                Prop::Flow(c) => Some(c.clone()),
                Prop::Bit(_) => None,
            })
            .collect()
    }

    pub fn to_expr(&self) -> BoolExpr {
        let mut it = self.0.iter().cloned().map(BoolExpr::Lit);
        match it.next() {
            None => BoolExpr::True,
            Some(first) => it.fold(first, |acc, l| BoolExpr::And(Box::new(acc), Box::new(l))),
        }
    }
}

impl fmt::Display for Cocube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Boolean combination of atomic propositions labelling a transition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoolExpr {
    True,
    False,
    Lit(Literal),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn prop(p: Prop) -> Self {
        BoolExpr::Lit(Literal::pos(p))
    }

    pub fn and_expr(self, rhs: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(self), Box::new(rhs))
    }

    pub fn or_expr(self, rhs: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(self), Box::new(rhs))
    }

    /// The label as a cocube, if it is a conjunction of literals.
    pub fn as_cocube(&self) -> Option<Cocube> {
        let mut out = Cocube::default();
        fn walk(e: &BoolExpr, out: &mut Cocube) -> bool {
            match e {
                BoolExpr::True => true,
                BoolExpr::Lit(l) => {
                    out.insert(l.clone());
                    true
                }
                BoolExpr::Not(inner) => match &**inner {
                    BoolExpr::Lit(l) => {
                        out.insert(l.complement());
                        true
                    }
                    _ => false,
                },
                BoolExpr::And(a, b) => walk(a, out) && walk(b, out),
                BoolExpr::False | BoolExpr::Or(..) => false,
            }
        }
        walk(self, &mut out).then_some(out)
    }

    /// Disjunctive normal form; contradictory cubes are kept.
    pub fn dnf(&self) -> Vec<Cocube> {
        fn go(e: &BoolExpr, neg: bool) -> Vec<Cocube> {
            match (e, neg) {
                (BoolExpr::True, false) | (BoolExpr::False, true) => vec![Cocube::default()],
                (BoolExpr::True, true) | (BoolExpr::False, false) => vec![],
                (BoolExpr::Lit(l), _) => {
                    vec![Cocube::new([if neg { l.complement() } else { l.clone() }])]
                }
                (BoolExpr::Not(a), _) => go(a, !neg),
                (BoolExpr::Or(a, b), false) | (BoolExpr::And(a, b), true) => {
                    let mut v = go(a, neg);
                    v.extend(go(b, neg));
                    v
                }
                (BoolExpr::And(a, b), false) | (BoolExpr::Or(a, b), true) => {
                    let left = go(a, neg);
                    let right = go(b, neg);
                    let mut v = Vec::with_capacity(left.len() * right.len());
                    for l in &left {
                        for r in &right {
                            let mut c = l.clone();
                            c.0.extend(r.0.iter().cloned());
                            v.push(c);
                        }
                    }
                    v
                }
            }
        }
        let mut cubes = go(self, false);
        cubes.sort();
        cubes.dedup();
        cubes
    }

    pub fn props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        fn walk(e: &BoolExpr, out: &mut BTreeSet<Prop>) {
            match e {
                BoolExpr::True | BoolExpr::False => {}
                BoolExpr::Lit(l) => {
                    out.insert(l.prop.clone());
                }
                BoolExpr::Not(a) => walk(a, out),
                BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    fn write(&self, out: &mut String, ap: &dyn Fn(&Prop) -> String) {
        let operand = |e: &BoolExpr, out: &mut String, paren: bool| {
            if paren {
                out.push('(');
            }
            e.write(out, ap);
            if paren {
                out.push(')');
            }
        };
        match self {
            BoolExpr::True => out.push_str("t"),
            BoolExpr::False => out.push_str("f"),
            BoolExpr::Lit(l) => {
                if !l.positive {
                    out.push('!');
                }
                out.push_str(&ap(&l.prop));
            }
            BoolExpr::Not(a) => {
                out.push('!');
                operand(a, out, matches!(**a, BoolExpr::And(..) | BoolExpr::Or(..)));
            }
            BoolExpr::And(a, b) => {
                operand(a, out, matches!(**a, BoolExpr::Or(..)));
                out.push_str(" & ");
                operand(b, out, matches!(**b, BoolExpr::Or(..) | BoolExpr::And(..)));
            }
            BoolExpr::Or(a, b) => {
                operand(a, out, false);
                out.push_str(" | ");
                operand(b, out, matches!(**b, BoolExpr::Or(..)));
            }
        }
    }

    /// Prints propositions through `ap`, using HOA's `t`/`f`/`!`/`&`/`|`.
    pub fn render(&self, ap: &dyn Fn(&Prop) -> String) -> String {
        let mut s = String::new();
        self.write(&mut s, ap);
        s
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|p| p.to_string()))
    }
}

/// A cocube specialised to a flow universe for fast evaluation on letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompiledCube {
    pub bits_pos: u32,
    pub bits_neg: u32,
    pub flows_pos: u64,
    pub flows_neg: u64,
}

impl CompiledCube {
    pub fn matches(&self, l: Letter) -> bool {
        self.bits_pos & !l.bits == 0
            && self.bits_neg & l.bits == 0
            && self.flows_pos & !l.flows == 0
            && self.flows_neg & l.flows == 0
    }
}

/// Compiles `label` over `universe`. A positive flow atom outside the
/// universe is never true, a negative one always true.
pub fn compile_label(label: &BoolExpr, universe: &Universe) -> Vec<CompiledCube> {
    let mut out = Vec::new();
    'cubes: for cube in label.dnf() {
        let mut c = CompiledCube {
            bits_pos: 0,
            bits_neg: 0,
            flows_pos: 0,
            flows_neg: 0,
        };
        for l in cube.literals() {
            match (&l.prop, l.positive) {
                (Prop::Bit(j), true) => c.bits_pos |= 1 << j,
                (Prop::Bit(j), false) => c.bits_neg |= 1 << j,
                (Prop::Flow(f), pos) => match universe.index_of(f) {
                    Some(i) if pos => c.flows_pos |= 1 << i,
                    Some(i) => c.flows_neg |= 1 << i,
                    None if pos => continue 'cubes,
                    None => {}
                },
            }
        }
        if c.bits_pos & c.bits_neg == 0 && c.flows_pos & c.flows_neg == 0 {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub src: usize,
    pub label: BoolExpr,
    pub dst: usize,
}

/// `⟨Q, q₀, δ, F⟩` with states `0..Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    names: Vec<String>,
    initial: usize,
    finals: Vec<bool>,
    transitions: Vec<Transition>,
}

impl BuchiAutomaton {
    /// `states` states named `q0, q1, …`, none final, no transitions.
    pub fn new(states: usize, initial: usize) -> Result<Self, BuchiError> {
        if initial >= states {
            return Err(BuchiError::StateOutOfRange(initial));
        }
        Ok(BuchiAutomaton {
            names: (0..states).map(|i| format!("q{i}")).collect(),
            initial,
            finals: vec![false; states],
            transitions: Vec::new(),
        })
    }

    /// The automaton with one non-final state and no transitions.
    pub fn empty() -> Self {
        BuchiAutomaton::new(1, 0).expect("valid")
    }

    /// One final state with a `true` self-loop.
    pub fn universal() -> Self {
        let mut a = BuchiAutomaton::new(1, 0).expect("valid");
        a.set_final(0, true).expect("valid");
        a.add_transition(0, BoolExpr::True, 0).expect("valid");
        a
    }

    pub fn add_transition(&mut self, src: usize, label: BoolExpr, dst: usize) -> Result<(), BuchiError> {
        for q in [src, dst] {
            if q >= self.num_states() {
                return Err(BuchiError::StateOutOfRange(q));
            }
        }
        self.transitions.push(Transition { src, label, dst });
        Ok(())
    }

    pub fn set_final(&mut self, q: usize, fin: bool) -> Result<(), BuchiError> {
        *self.finals.get_mut(q).ok_or(BuchiError::StateOutOfRange(q))? = fin;
        Ok(())
    }

    pub fn set_name(&mut self, q: usize, name: String) -> Result<(), BuchiError> {
        *self.names.get_mut(q).ok_or(BuchiError::StateOutOfRange(q))? = name;
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states()).filter(|&q| self.finals[q])
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transitions grouped by source state.
    pub fn successors(&self) -> Vec<Vec<&Transition>> {
        let mut out = vec![Vec::new(); self.num_states()];
        for t in &self.transitions {
            out[t.src].push(t);
        }
        out
    }

    pub fn props(&self) -> BTreeSet<Prop> {
        self.transitions.iter().flat_map(|t| t.label.props()).collect()
    }

    /// Every label is a non-contradictory cocube without negated flow atoms.
    pub fn is_normalized(&self) -> bool {
        self.transitions.iter().all(|t| match t.label.as_cocube() {
            Some(c) => !c.is_contradictory() && c.negative_flows().is_empty(),
            None => false,
        })
    }

    /// Normalized labels as cocubes; `None` if some label is not one.
    pub fn cocube_transitions(&self) -> Option<Vec<(usize, Cocube, usize)>> {
        self.transitions
            .iter()
            .map(|t| t.label.as_cocube().map(|c| (t.src, c, t.dst)))
            .collect()
    }
}

impl fmt::Display for BuchiAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.num_states())?;
        writeln!(f, "initial: {}", self.names[self.initial])?;
        let finals: Vec<&str> = self.finals().map(|q| self.names[q].as_str()).collect();
        writeln!(f, "final: {}", finals.join(", "))?;
        for t in &self.transitions {
            writeln!(f, "{} -[{}]-> {}", self.names[t.src], t.label, self.names[t.dst])?;
        }
        Ok(())
    }
}

/// Splits every label into its DNF cocubes and cleans them up.
///
/// Contradictory cocubes are dropped, as are cocubes whose bits match no
/// letter a discretized trace can produce (all bits false, or the pattern of
/// a non-padding action) when `enc` is given. Negated flow literals are
/// deleted when `positive_expected` holds and rejected otherwise.
pub fn normalize_labels(
    aut: &BuchiAutomaton,
    positive_expected: bool,
    enc: Option<&ActionEncoding>,
) -> Result<BuchiAutomaton, BuchiError> {
    let legal: Option<Vec<u32>> = enc.map(|e| {
        std::iter::once(0)
            .chain(e.alphabet().iter().map(|a| e.bits(a).expect("encoded")))
            .collect()
    });
    let mut seen = BTreeSet::new();
    let mut out = BuchiAutomaton {
        names: aut.names.clone(),
        initial: aut.initial,
        finals: aut.finals.clone(),
        transitions: Vec::new(),
    };
    for t in &aut.transitions {
        for cube in t.label.dnf() {
            if cube.is_contradictory() {
                continue;
            }
            if let Some(legal) = &legal {
                if !legal.iter().any(|&m| cube.consistent_with_bits(m)) {
                    continue;
                }
            }
            let negatives = cube.negative_flows();
            let cube = if negatives.is_empty() {
                cube
            } else if positive_expected {
                Cocube(
                    cube.0
                        .into_iter()
                        .filter(|l| l.positive || matches!(l.prop, Prop::Bit(_)))
                        .collect(),
                )
            } else {
                return Err(BuchiError::NegativeFlow(
                    negatives.into_iter().next().expect("nonempty").to_string(),
                ));
            };
            if seen.insert((t.src, cube.clone(), t.dst)) {
                out.transitions.push(Transition {
                    src: t.src,
                    label: cube.to_expr(),
                    dst: t.dst,
                });
            }
        }
    }
    Ok(out)
}

/// Strongly connected components (Tarjan, iterative). Returns the component
/// index of every node; components are numbered in reverse topological order.
pub(crate) fn scc(n: usize, succ: &[Vec<usize>]) -> Vec<usize> {
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Removes unreachable states and states from which no accepting cycle is
/// reachable, then renumbers states in breadth-first order from the initial
/// state. Names are reset to `q0, q1, …`.
pub fn trim(aut: &BuchiAutomaton) -> BuchiAutomaton {
    let n = aut.num_states();
    let mut succ = vec![Vec::new(); n];
    for t in &aut.transitions {
        succ[t.src].push(t.dst);
    }
    let comp = scc(n, &succ);
    let mut good = BTreeSet::new();
    for t in &aut.transitions {
        if comp[t.src] == comp[t.dst] && (aut.finals[t.src] || aut.finals[t.dst]) {
            // An internal edge touching a final state puts that state on a cycle.
            good.insert(comp[t.src]);
        }
    }
    let mut pred = vec![Vec::new(); n];
    for t in &aut.transitions {
        pred[t.dst].push(t.src);
    }
    let mut productive = vec![false; n];
    let mut work: Vec<usize> = (0..n).filter(|&q| good.contains(&comp[q])).collect();
    for &q in &work {
        productive[q] = true;
    }
    while let Some(q) = work.pop() {
        for &p in &pred[q] {
            if !productive[p] {
                productive[p] = true;
                work.push(p);
            }
        }
    }
    if !productive[aut.initial] {
        return BuchiAutomaton::empty();
    }
    let mut order = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([aut.initial]);
    let mut count = 0;
    order[aut.initial] = 0;
    count += 1;
    let succ_t = aut.successors();
    let mut fresh = Vec::new();
    while let Some(q) = queue.pop_front() {
        fresh.push(q);
        for t in &succ_t[q] {
            if productive[t.dst] && order[t.dst] == usize::MAX {
                order[t.dst] = count;
                count += 1;
                queue.push_back(t.dst);
            }
        }
    }
    let mut out = BuchiAutomaton::new(count, 0).expect("nonempty");
    for &q in &fresh {
        out.finals[order[q]] = aut.finals[q];
    }
    let mut seen = BTreeSet::new();
    for t in &aut.transitions {
        if order[t.src] != usize::MAX && order[t.dst] != usize::MAX && productive[t.dst] {
            let key = (order[t.src], t.label.clone(), order[t.dst]);
            if seen.insert(key.clone()) {
                out.transitions.push(Transition {
                    src: key.0,
                    label: key.1,
                    dst: key.2,
                });
            }
        }
    }
    out.transitions.sort_by(|a, b| (a.src, a.dst, &a.label).cmp(&(b.src, b.dst, &b.label)));
    out
}

/// Merges states with equal finality and equal outgoing `(label, class)`
/// sets until stable.
pub fn merge_bisimilar(aut: &BuchiAutomaton) -> BuchiAutomaton {
    let n = aut.num_states();
    let mut block: Vec<usize> = (0..n).map(|q| aut.finals[q] as usize).collect();
    let succ = aut.successors();
    loop {
        let mut sigs: BTreeMap<(usize, BTreeSet<(&BoolExpr, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0; n];
        for q in 0..n {
            let sig: BTreeSet<(&BoolExpr, usize)> = succ[q].iter().map(|t| (&t.label, block[t.dst])).collect();
            let len = sigs.len();
            next[q] = *sigs.entry((block[q], sig)).or_insert(len);
        }
        let stable = sigs.len() == block.iter().collect::<BTreeSet<_>>().len();
        block = next;
        if stable {
            break;
        }
    }
    let count = block.iter().collect::<BTreeSet<_>>().len();
    let mut out = BuchiAutomaton::new(count, block[aut.initial]).expect("valid");
    for q in 0..n {
        out.finals[block[q]] = aut.finals[q];
    }
    let mut seen = BTreeSet::new();
    for t in &aut.transitions {
        let key = (block[t.src], t.label.clone(), block[t.dst]);
        if seen.insert(key.clone()) {
            out.transitions.push(Transition {
                src: key.0,
                label: key.1,
                dst: key.2,
            });
        }
    }
    trim(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(s: &str) -> Prop {
        Prop::Flow(FlowConstraint::parse(s, None).unwrap())
    }

    #[test]
    fn cocube_label_is_kept() {
        let label = BoolExpr::prop(flow("x >= 21")).and_expr(BoolExpr::Lit(Literal::neg(Prop::Bit(0))));
        let mut a = BuchiAutomaton::new(1, 0).unwrap();
        a.add_transition(0, label, 0).unwrap();
        let n = normalize_labels(&a, true, None).unwrap();
        assert_eq!(n.transitions().len(), 1);
        assert_eq!(n.transitions()[0].label.to_string(), "!b0 & \"x >= 21\"");
    }

    #[test]
    fn disjunction_is_split() {
        let label = BoolExpr::Or(
            Box::new(BoolExpr::prop(flow("x >= 21"))),
            Box::new(BoolExpr::prop(flow("y < 2"))),
        );
        let mut a = BuchiAutomaton::new(1, 0).unwrap();
        a.add_transition(0, label, 0).unwrap();
        let n = normalize_labels(&a, true, None).unwrap();
        let labels: Vec<String> = n.transitions().iter().map(|t| t.label.to_string()).collect();
        assert_eq!(labels, vec!["\"x >= 21\"", "\"y < 2\""]);
    }

    #[test]
    fn negative_flows_are_deleted_or_rejected() {
        let label = BoolExpr::prop(flow("x >= 21")).and_expr(BoolExpr::Not(Box::new(BoolExpr::prop(flow("y < 2")))));
        let mut a = BuchiAutomaton::new(1, 0).unwrap();
        a.add_transition(0, label, 0).unwrap();
        let n = normalize_labels(&a, true, None).unwrap();
        assert_eq!(n.transitions()[0].label.to_string(), "\"x >= 21\"");
        assert!(n.is_normalized());
        assert_eq!(
            normalize_labels(&a, false, None),
            Err(BuchiError::NegativeFlow("y < 2".into()))
        );
    }

    #[test]
    fn contradictions_and_impossible_patterns_are_dropped() {
        let b = |j, p| BoolExpr::Lit(Literal { prop: Prop::Bit(j), positive: p });
        let mut a = BuchiAutomaton::new(1, 0).unwrap();
        a.add_transition(0, b(0, true).and_expr(b(0, false)), 0).unwrap();
        // With A = {a}, pattern 2 (b0 & !b1) is padding.
        a.add_transition(0, b(0, true).and_expr(b(1, false)), 0).unwrap();
        a.add_transition(0, b(1, true), 0).unwrap();
        let enc = crate::discrete::make_encoding(["a"]).unwrap();
        let n = normalize_labels(&a, true, Some(&enc)).unwrap();
        let labels: Vec<String> = n.transitions().iter().map(|t| t.label.to_string()).collect();
        assert_eq!(labels, vec!["b1"]);
    }

    #[test]
    fn trim_drops_dead_states() {
        let mut a = BuchiAutomaton::new(4, 0).unwrap();
        a.add_transition(0, BoolExpr::True, 1).unwrap();
        a.add_transition(0, BoolExpr::True, 2).unwrap();
        a.add_transition(2, BoolExpr::True, 2).unwrap();
        a.add_transition(1, BoolExpr::True, 1).unwrap();
        a.set_final(1, true).unwrap();
        let t = trim(&a);
        assert_eq!(t.num_states(), 2);
        assert!(t.is_final(1));
        let mut e = BuchiAutomaton::new(2, 0).unwrap();
        e.add_transition(0, BoolExpr::True, 1).unwrap();
        e.set_final(1, true).unwrap();
        assert_eq!(trim(&e), BuchiAutomaton::empty());
    }

    #[test]
    fn sccs() {
        let succ = vec![vec![1], vec![0, 2], vec![2], vec![]];
        let c = scc(4, &succ);
        assert_eq!(c[0], c[1]);
        assert_ne!(c[1], c[2]);
        assert_ne!(c[2], c[3]);
    }
}
