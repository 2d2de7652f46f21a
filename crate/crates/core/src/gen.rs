//! Seeded random formulas, automata and traces for property suites.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::buchi::{BoolExpr, BuchiAutomaton, Literal, Prop};
use crate::constraint::FlowConstraint;
use crate::discrete::{ActionEncoding, DiscreteWord, Letter, LtlFormula};
use crate::formula::{Action, HyLtlFormula};
use crate::oracle::{AbstractLassoTrace, AbstractTrajectory, Atom, Step, Universe};

pub use rand::SeedableRng;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Flow constraints for generated formulas. No member is the dual of another.
pub fn flow_pool() -> Vec<FlowConstraint> {
    ["x >= 21", "y < 1", "x' <= 2 * x"]
        .iter()
        .map(|s| FlowConstraint::parse(s, None).expect("valid pool constraint"))
        .collect()
}

pub fn action_pool() -> Vec<Action> {
    vec![Action::new("on"), Action::new("off")]
}

/// Atom and action alphabet for one generated formula.
#[derive(Debug, Clone)]
pub struct Alphabet {
    pub flows: Vec<FlowConstraint>,
    pub actions: Vec<Action>,
}

impl Alphabet {
    /// Picks `1..=max_flows` pool constraints and `1..=max_actions` actions.
    pub fn random(rng: &mut Rng64, max_flows: usize, max_actions: usize) -> Self {
        let mut flows = flow_pool();
        flows.shuffle(rng);
        flows.truncate(rng.gen_range(1..=max_flows.min(flows.len())));
        flows.sort();
        let mut actions = action_pool();
        actions.truncate(rng.gen_range(1..=max_actions.min(actions.len())));
        Alphabet { flows, actions }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    /// Negation anywhere.
    Full,
    /// Negation only on atoms.
    Nnf,
    /// Negation only on actions.
    Positive,
}

fn leaf(rng: &mut Rng64, a: &Alphabet, shape: Shape) -> HyLtlFormula {
    let r = rng.gen_range(0..10);
    let f = match r {
        0 => return HyLtlFormula::True,
        1 if shape != Shape::Full => return HyLtlFormula::False,
        1..=5 => HyLtlFormula::flow(a.flows.choose(rng).expect("nonempty").clone()),
        _ => HyLtlFormula::Action(a.actions.choose(rng).expect("nonempty").clone()),
    };
    let negate = match (shape, &f) {
        (Shape::Nnf, _) => rng.gen_bool(0.3),
        (Shape::Positive, HyLtlFormula::Action(_)) => rng.gen_bool(0.3),
        _ => false,
    };
    if negate {
        f.not()
    } else {
        f
    }
}

fn formula(rng: &mut Rng64, depth: usize, a: &Alphabet, shape: Shape) -> HyLtlFormula {
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng, a, shape);
    }
    let ops = if shape == Shape::Full { 8 } else { 7 };
    match rng.gen_range(0..ops) {
        0 => formula(rng, depth - 1, a, shape).and(formula(rng, depth - 1, a, shape)),
        1 => formula(rng, depth - 1, a, shape).or(formula(rng, depth - 1, a, shape)),
        2 => formula(rng, depth - 1, a, shape).next(),
        3 => formula(rng, depth - 1, a, shape).until(formula(rng, depth - 1, a, shape)),
        4 => formula(rng, depth - 1, a, shape).release(formula(rng, depth - 1, a, shape)),
        5 => HyLtlFormula::True.until(formula(rng, depth - 1, a, shape)),
        6 => HyLtlFormula::False.release(formula(rng, depth - 1, a, shape)),
        _ => formula(rng, depth - 1, a, shape).not(),
    }
}

/// Arbitrary HyLTL of depth at most `depth`.
pub fn random_hyltl(rng: &mut Rng64, depth: usize, a: &Alphabet) -> HyLtlFormula {
    formula(rng, depth, a, Shape::Full)
}

/// NNF HyLTL of depth at most `depth`.
pub fn random_nnf(rng: &mut Rng64, depth: usize, a: &Alphabet) -> HyLtlFormula {
    formula(rng, depth, a, Shape::Nnf)
}

/// HyLTL⁺: flow atoms only positive.
pub fn random_positive(rng: &mut Rng64, depth: usize, a: &Alphabet) -> HyLtlFormula {
    formula(rng, depth, a, Shape::Positive)
}

/// NNF LTL over `flows` (positive only) and bits `b0..b{bits-1}` (both polarities).
pub fn random_positive_ltl(rng: &mut Rng64, depth: usize, flows: &[FlowConstraint], bits: u32) -> LtlFormula {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..8) {
            0 => LtlFormula::True,
            1 => LtlFormula::False,
            2..=4 => LtlFormula::Flow(flows.choose(rng).expect("nonempty").clone()),
            _ => {
                let b = LtlFormula::Bit(rng.gen_range(0..bits));
                if rng.gen_bool(0.5) {
                    b.not()
                } else {
                    b
                }
            }
        };
    }
    let op = rng.gen_range(0..5);
    let mut sub = || random_positive_ltl(rng, depth - 1, flows, bits);
    match op {
        0 => sub().and(sub()),
        1 => sub().or(sub()),
        2 => sub().next(),
        3 => sub().until(sub()),
        _ => sub().release(sub()),
    }
}

/// Random automaton over `props`, with labels that are single literals,
/// literal conjunctions, `true`, or contradictions.
pub fn random_buchi(rng: &mut Rng64, max_states: usize, props: &[Prop]) -> BuchiAutomaton {
    let n = rng.gen_range(1..=max_states);
    let mut a = BuchiAutomaton::new(n, rng.gen_range(0..n)).expect("at least one state");
    for q in 0..n {
        if rng.gen_bool(0.3) {
            a.set_final(q, true).expect("in range");
        }
    }
    let edges = rng.gen_range(0..=2 * n);
    for _ in 0..edges {
        let src = rng.gen_range(0..n);
        let dst = rng.gen_range(0..n);
        let mut label = BoolExpr::True;
        for _ in 0..rng.gen_range(0..=2) {
            let p = props.choose(rng).expect("nonempty").clone();
            let lit = if rng.gen_bool(0.5) { Literal::pos(p) } else { Literal::neg(p) };
            label = label.and_expr(BoolExpr::Lit(lit));
        }
        a.add_transition(src, label, dst).expect("in range");
    }
    a
}

/// Shape limits for lasso traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceBounds {
    pub stem: usize,
    pub cycle: usize,
    pub atoms: usize,
}

impl Default for TraceBounds {
    fn default() -> Self {
        TraceBounds {
            stem: 2,
            cycle: 2,
            atoms: 2,
        }
    }
}

/// All lasso traces over a universe and action set within [`TraceBounds`].
#[derive(Debug, Clone)]
pub struct TraceSpace {
    universe: Arc<Universe>,
    actions: Vec<Action>,
    bounds: TraceBounds,
}

impl TraceSpace {
    pub fn new(universe: Arc<Universe>, actions: Vec<Action>, bounds: TraceBounds) -> Self {
        TraceSpace {
            universe,
            actions,
            bounds,
        }
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn bounds(&self) -> TraceBounds {
        self.bounds
    }

    fn atoms(&self) -> u64 {
        1u64 << self.universe.len()
    }

    /// Every trajectory of `1..=atoms` atoms.
    pub fn trajectories(&self) -> Vec<AbstractTrajectory> {
        let mut out = Vec::new();
        let mut layer: Vec<Vec<Atom>> = vec![Vec::new()];
        for _ in 0..self.bounds.atoms {
            let mut next = Vec::new();
            for prefix in &layer {
                for m in 0..self.atoms() {
                    let mut t = prefix.clone();
                    t.push(Atom(m));
                    next.push(t);
                }
            }
            out.extend(next.iter().map(|t| AbstractTrajectory::new(t.clone()).expect("nonempty")));
            layer = next;
        }
        out
    }

    /// One single-atom trajectory per conjunction mask. Flow atoms, their
    /// negations and the discrete abstraction read a trajectory only through
    /// the set of constraints all its atoms satisfy, so for those oracles
    /// this set stands for every trajectory of the space.
    pub fn representative_trajectories(&self) -> Vec<AbstractTrajectory> {
        (0..self.atoms()).map(|m| AbstractTrajectory::single(Atom(m))).collect()
    }

    fn steps(&self, trajectories: &[AbstractTrajectory]) -> Vec<Step> {
        let mut out = Vec::new();
        for t in trajectories {
            for a in &self.actions {
                out.push(Step::new(t.clone(), a.clone()));
            }
        }
        out
    }

    /// Visits each lasso of the space once, in a canonical form: the cycle
    /// is primitive and, when the stem is nonempty, the stem's last step
    /// differs from the cycle's last step.
    pub fn for_each(&self, representatives: bool, mut f: impl FnMut(&AbstractLassoTrace)) {
        let trajectories = if representatives {
            self.representative_trajectories()
        } else {
            self.trajectories()
        };
        let steps = self.steps(&trajectories);
        let k = steps.len();
        let cycles = sequences(k, 1, self.bounds.cycle);
        let stems = sequences(k, 0, self.bounds.stem);
        for cycle in cycles.iter().filter(|c| is_primitive(c)) {
            let last = *cycle.last().expect("nonempty");
            for stem in &stems {
                if stem.last() == Some(&last) {
                    continue;
                }
                let pick = |ix: &Vec<usize>| ix.iter().map(|&i| steps[i].clone()).collect();
                let t = AbstractLassoTrace::new(self.universe.clone(), pick(stem), pick(cycle))
                    .expect("nonempty cycle");
                f(&t);
            }
        }
    }

    pub fn count(&self, representatives: bool) -> usize {
        let mut n = 0;
        self.for_each(representatives, |_| n += 1);
        n
    }

    /// A uniformly shaped random lasso of the space.
    pub fn sample(&self, rng: &mut Rng64) -> AbstractLassoTrace {
        let step = |rng: &mut Rng64| {
            let len = rng.gen_range(1..=self.bounds.atoms);
            let atoms = (0..len).map(|_| Atom(rng.gen_range(0..self.atoms()))).collect();
            let t = AbstractTrajectory::new(atoms).expect("nonempty");
            Step::new(t, self.actions.choose(rng).expect("nonempty").clone())
        };
        let s = rng.gen_range(0..=self.bounds.stem);
        let c = rng.gen_range(1..=self.bounds.cycle);
        let stem = (0..s).map(|_| step(rng)).collect();
        let cycle = (0..c).map(|_| step(rng)).collect();
        AbstractLassoTrace::new(self.universe.clone(), stem, cycle).expect("nonempty cycle")
    }
}

/// Lasso words over a universe whose bit letters range over `patterns`,
/// enumerated in the canonical form of [`TraceSpace::for_each`].
#[derive(Debug, Clone)]
pub struct WordSpace {
    pub universe: Arc<Universe>,
    pub patterns: Vec<u32>,
    pub stem: usize,
    pub cycle: usize,
}

impl WordSpace {
    /// Every bit mask of width `bits`.
    pub fn all_bits(universe: Arc<Universe>, bits: u32, stem: usize, cycle: usize) -> Self {
        WordSpace {
            universe,
            patterns: (0..1u32 << bits).collect(),
            stem,
            cycle,
        }
    }

    /// The masks a discretized trace can produce: all-false and the pattern
    /// of every non-padding action.
    pub fn legal(universe: Arc<Universe>, enc: &ActionEncoding, stem: usize, cycle: usize) -> Self {
        let mut patterns = vec![0];
        patterns.extend(enc.alphabet().iter().map(|a| enc.bits(a).expect("encoded")));
        WordSpace {
            universe,
            patterns,
            stem,
            cycle,
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for &bits in &self.patterns {
            for flows in 0..1u64 << self.universe.len() {
                out.push(Letter { flows, bits });
            }
        }
        out
    }

    pub fn for_each(&self, mut f: impl FnMut(&DiscreteWord)) {
        let letters = self.letters();
        let k = letters.len();
        let stems = sequences(k, 0, self.stem);
        for cycle in sequences(k, 1, self.cycle).iter().filter(|c| is_primitive(c)) {
            let last = *cycle.last().expect("nonempty");
            for stem in &stems {
                if stem.last() == Some(&last) {
                    continue;
                }
                let pick = |ix: &Vec<usize>| ix.iter().map(|&i| letters[i]).collect();
                let w = DiscreteWord::new(self.universe.clone(), pick(stem), pick(cycle)).expect("nonempty cycle");
                f(&w);
            }
        }
    }
}

/// Index sequences over `0..k` with length in `min..=max`.
pub(crate) fn sequences(k: usize, min: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for len in 0..=max {
        if len >= min {
            out.extend(layer.iter().cloned());
        }
        if len == max {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|p| {
                (0..k).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

pub(crate) fn is_primitive(c: &[usize]) -> bool {
    let n = c.len();
    (1..n).filter(|d| n % d == 0).all(|d| (0..n).any(|i| c[i] != c[i % d]))
}
