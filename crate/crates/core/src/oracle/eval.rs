//! Direct evaluation of HyLTL on abstract lasso traces and of LTL on lasso
//! words. The two evaluators share no code: HyLTL walks the unrolled trace,
//! LTL iterates fixpoints over lasso positions.

use thiserror::Error;

use crate::discrete::{DiscreteWord, LtlFormula};
use crate::formula::{Action, HyLtlFormula};
use crate::oracle::trace::{AbstractLassoTrace, Universe};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("flow constraint `{0}` is not part of the trace universe")]
    OutsideUniverse(String),
    #[error("positions start at 1")]
    ZeroPosition,
}

#[derive(Debug, Clone)]
enum HNode {
    True,
    False,
    Flow(usize),
    Action(Action),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

/// A HyLTL formula compiled against a fixed universe, reusable across
/// traces over that universe.
#[derive(Debug, Clone)]
pub struct HyLtlEvaluator {
    nodes: Vec<HNode>,
    root: usize,
}

impl HyLtlEvaluator {
    pub fn new(phi: &HyLtlFormula, universe: &Universe) -> Result<Self, EvalError> {
        let mut nodes = Vec::new();
        let root = Self::compile(phi, universe, &mut nodes)?;
        Ok(HyLtlEvaluator { nodes, root })
    }

    fn compile(phi: &HyLtlFormula, u: &Universe, nodes: &mut Vec<HNode>) -> Result<usize, EvalError> {
        use HyLtlFormula as H;
        let node = match phi {
            H::True => HNode::True,
            H::False => HNode::False,
            H::Flow(f) => HNode::Flow(
                u.index_of(f)
                    .ok_or_else(|| EvalError::OutsideUniverse(f.to_string()))?,
            ),
            H::Action(a) => HNode::Action(a.clone()),
            H::Not(a) => HNode::Not(Self::compile(a, u, nodes)?),
            H::Next(a) => HNode::Next(Self::compile(a, u, nodes)?),
            H::And(a, b) => HNode::And(Self::compile(a, u, nodes)?, Self::compile(b, u, nodes)?),
            H::Or(a, b) => HNode::Or(Self::compile(a, u, nodes)?, Self::compile(b, u, nodes)?),
            H::Until(a, b) => HNode::Until(Self::compile(a, u, nodes)?, Self::compile(b, u, nodes)?),
            H::Release(a, b) => HNode::Release(Self::compile(a, u, nodes)?, Self::compile(b, u, nodes)?),
        };
        nodes.push(node);
        Ok(nodes.len() - 1)
    }

    /// `α, i ⊩ φ` with 1-based position `i`.
    pub fn eval_at(&self, alpha: &AbstractLassoTrace, i: usize) -> Result<bool, EvalError> {
        if i == 0 {
            return Err(EvalError::ZeroPosition);
        }
        let mut run = HRun::new(self, alpha);
        let k = run.canon(i - 1);
        Ok(run.eval(self.root, k))
    }

    /// `α, 1 ⊩ φ`.
    pub fn eval(&self, alpha: &AbstractLassoTrace) -> bool {
        let mut run = HRun::new(self, alpha);
        run.eval(self.root, 0)
    }
}

struct HRun<'a> {
    ev: &'a HyLtlEvaluator,
    alpha: &'a AbstractLassoTrace,
    /// Distinct positions: the stem, one loop pass whose first step may
    /// still see a stem action, and one more pass. Position `s + m` is
    /// followed by `s + 1`.
    positions: usize,
    memo: Vec<Option<bool>>,
}

impl<'a> HRun<'a> {
    fn new(ev: &'a HyLtlEvaluator, alpha: &'a AbstractLassoTrace) -> Self {
        let positions = alpha.len() + 1;
        HRun {
            ev,
            alpha,
            positions,
            memo: vec![None; ev.nodes.len() * positions],
        }
    }

    fn canon(&self, k: usize) -> usize {
        let s = self.alpha.stem().len();
        let m = self.alpha.cycle().len();
        if k <= s + m {
            k
        } else {
            s + 1 + (k - s - 1) % m
        }
    }

    fn succ(&self, k: usize) -> usize {
        self.canon(k + 1)
    }

    fn eval(&mut self, node: usize, k: usize) -> bool {
        let slot = node * self.positions + k;
        if let Some(v) = self.memo[slot] {
            return v;
        }
        let v = match self.ev.nodes[node].clone() {
            HNode::True => true,
            HNode::False => false,
            HNode::Flow(idx) => self.alpha.step_at(k).trajectory.satisfies(idx),
            HNode::Action(a) => k >= 1 && self.alpha.step_at(k - 1).action == a,
            HNode::Not(a) => !self.eval(a, k),
            HNode::And(a, b) => self.eval(a, k) && self.eval(b, k),
            HNode::Or(a, b) => self.eval(a, k) || self.eval(b, k),
            HNode::Next(a) => {
                let n = self.succ(k);
                self.eval(a, n)
            }
            HNode::Until(a, b) => {
                // Every canonical position is met within `positions` steps.
                let mut j = k;
                let mut result = false;
                for _ in 0..self.positions {
                    if self.eval(b, j) {
                        result = true;
                        break;
                    }
                    if !self.eval(a, j) {
                        break;
                    }
                    j = self.succ(j);
                }
                result
            }
            HNode::Release(a, b) => {
                let mut j = k;
                let mut result = true;
                for _ in 0..self.positions {
                    if !self.eval(b, j) {
                        result = false;
                        break;
                    }
                    if self.eval(a, j) {
                        break;
                    }
                    j = self.succ(j);
                }
                result
            }
        };
        self.memo[slot] = Some(v);
        v
    }
}

/// `α, i ⊩ φ` with 1-based `i`.
pub fn eval_hyltl(alpha: &AbstractLassoTrace, i: usize, phi: &HyLtlFormula) -> Result<bool, EvalError> {
    HyLtlEvaluator::new(phi, alpha.universe())?.eval_at(alpha, i)
}

#[derive(Debug, Clone)]
enum LNode {
    True,
    False,
    Bit(u32),
    Flow(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

/// An LTL formula compiled against a fixed universe.
#[derive(Debug, Clone)]
pub struct LtlEvaluator {
    /// Children precede parents.
    nodes: Vec<LNode>,
}

impl LtlEvaluator {
    pub fn new(f: &LtlFormula, universe: &Universe) -> Result<Self, EvalError> {
        let mut nodes = Vec::new();
        Self::compile(f, universe, &mut nodes)?;
        Ok(LtlEvaluator { nodes })
    }

    fn compile(f: &LtlFormula, u: &Universe, nodes: &mut Vec<LNode>) -> Result<usize, EvalError> {
        use LtlFormula as L;
        let node = match f {
            L::True => LNode::True,
            L::False => LNode::False,
            L::Bit(j) => LNode::Bit(*j),
            L::Flow(c) => LNode::Flow(
                u.index_of(c)
                    .ok_or_else(|| EvalError::OutsideUniverse(c.to_string()))?,
            ),
            L::Not(a) => LNode::Not(Self::compile(a, u, nodes)?),
            L::Next(a) => LNode::Next(Self::compile(a, u, nodes)?),
            L::And(a, b) => LNode::And(Self::compile(a, u, nodes)?, Self::compile(b, u, nodes)?),
            L::Or(a, b) => LNode::Or(Self::compile(a, u, nodes)?, Self::compile(b, u, nodes)?),
            L::Until(a, b) => LNode::Until(Self::compile(a, u, nodes)?, Self::compile(b, u, nodes)?),
            L::Release(a, b) => LNode::Release(Self::compile(a, u, nodes)?, Self::compile(b, u, nodes)?),
        };
        nodes.push(node);
        Ok(nodes.len() - 1)
    }

    /// Truth value of the formula at every lasso position of `w`.
    pub fn eval_all(&self, w: &DiscreteWord) -> Vec<bool> {
        let len = w.len();
        let succ: Vec<usize> = (0..len).map(|p| w.succ(p)).collect();
        let mut vals: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v: Vec<bool> = match *node {
                LNode::True => vec![true; len],
                LNode::False => vec![false; len],
                LNode::Bit(j) => (0..len).map(|p| w.letter(p).bits >> j & 1 == 1).collect(),
                LNode::Flow(i) => (0..len).map(|p| w.letter(p).flows >> i & 1 == 1).collect(),
                LNode::Not(a) => vals[a].iter().map(|x| !x).collect(),
                LNode::And(a, b) => (0..len).map(|p| vals[a][p] && vals[b][p]).collect(),
                LNode::Or(a, b) => (0..len).map(|p| vals[a][p] || vals[b][p]).collect(),
                LNode::Next(a) => (0..len).map(|p| vals[a][succ[p]]).collect(),
                LNode::Until(a, b) => fixpoint(len, &succ, false, |p, next| vals[b][p] || (vals[a][p] && next)),
                LNode::Release(a, b) => fixpoint(len, &succ, true, |p, next| vals[b][p] && (vals[a][p] || next)),
            };
            vals.push(v);
        }
        vals.pop().expect("nonempty formula")
    }

    /// `w, 1 ⊩ γ`.
    pub fn eval(&self, w: &DiscreteWord) -> bool {
        self.eval_all(w)[0]
    }
}

/// Least (`init = false`) or greatest (`init = true`) fixpoint of
/// `v[p] = step(p, v[succ p])`.
fn fixpoint(len: usize, succ: &[usize], init: bool, step: impl Fn(usize, bool) -> bool) -> Vec<bool> {
    let mut v = vec![init; len];
    loop {
        let mut changed = false;
        for p in (0..len).rev() {
            let nv = step(p, v[succ[p]]);
            if nv != v[p] {
                v[p] = nv;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

/// `w, 1 ⊩ γ` by fixpoint iteration over the lasso positions.
pub fn eval_ltl_lasso(w: &DiscreteWord, gamma: &LtlFormula) -> Result<bool, EvalError> {
    Ok(LtlEvaluator::new(gamma, w.universe())?.eval(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{gamma, make_encoding, parse_ltl, sigma, Letter};
    use crate::formula::{parse_hyltl, Declarations};
    use std::sync::Arc;

    fn parse(s: &str) -> HyLtlFormula {
        parse_hyltl(s, &Declarations::new(["x"], ["on", "off"]).with_split()).unwrap()
    }

    fn trace(s: &str) -> AbstractLassoTrace {
        let u = Arc::new(
            Universe::new([
                crate::FlowConstraint::parse("x >= 21", None).unwrap(),
                crate::FlowConstraint::parse("x >= 18", None).unwrap(),
            ])
            .unwrap(),
        );
        AbstractLassoTrace::parse(s, Some(u)).unwrap()
    }

    #[test]
    fn actions_are_false_at_first_position() {
        let t = trace("([{}] on)");
        assert!(!eval_hyltl(&t, 1, &parse("on")).unwrap());
        assert!(eval_hyltl(&t, 2, &parse("on")).unwrap());
        assert!(eval_hyltl(&t, 1, &parse("X on")).unwrap());
        assert_eq!(eval_hyltl(&t, 0, &parse("on")), Err(EvalError::ZeroPosition));
    }

    #[test]
    fn flow_atoms_hold_throughout() {
        let t = trace("([{x >= 21} {x >= 21}] on)");
        assert!(eval_hyltl(&t, 1, &parse("{x >= 21}")).unwrap());
        let t = trace("([{x >= 21} {}] on)");
        assert!(!eval_hyltl(&t, 1, &parse("{x >= 21}")).unwrap());
        assert!(eval_hyltl(&t, 1, &parse("!{x >= 21}")).unwrap());
    }

    #[test]
    fn negated_safety_on_hand_trace() {
        let t = trace("[{x >= 21}] on ([{x >= 21}] off)");
        assert!(eval_hyltl(&t, 1, &parse("F({x>=21} & X on)")).unwrap());
        let t = trace("[{}] on ([{}] off)");
        assert!(!eval_hyltl(&t, 1, &parse("F({x>=21} & X on)")).unwrap());
    }

    #[test]
    fn previous_action_matters_at_loop_entry() {
        // Position 2 sees `on`, later loop entries see `off`.
        let t = trace("[{}] on ([{}] off)");
        assert!(eval_hyltl(&t, 1, &parse("X on & X X off & X X X off")).unwrap());
        assert!(!eval_hyltl(&t, 1, &parse("F(X on & X X on)")).unwrap());
        assert!(!eval_hyltl(&t, 1, &parse("X G off")).unwrap());
        assert!(eval_hyltl(&t, 1, &parse("X X G off")).unwrap());
    }

    #[test]
    fn ltl_lasso_examples() {
        let u = Arc::new(Universe::new([crate::FlowConstraint::parse("x >= 21", None).unwrap()]).unwrap());
        let g = parse_ltl("!b0 & !b1 & (true U (\"x >= 21\" & X(b0 & !b1)))").unwrap();
        let w = DiscreteWord::new(u.clone(), vec![Letter { flows: 1, bits: 0 }], vec![Letter { flows: 1, bits: 1 }]).unwrap();
        assert!(eval_ltl_lasso(&w, &g).unwrap());
        let w = DiscreteWord::new(u.clone(), vec![Letter::default()], vec![Letter { flows: 0, bits: 1 }]).unwrap();
        assert!(!eval_ltl_lasso(&w, &g).unwrap());
        assert!(eval_ltl_lasso(&w, &LtlFormula::True).unwrap());
        assert!(!eval_ltl_lasso(&w, &LtlFormula::False).unwrap());
    }

    #[test]
    fn sigma_agrees_on_thermostat_formulas() {
        let enc = make_encoding(["on", "off"]).unwrap();
        for f in ["F({x>=21} & X on)", "G({x >= 18} U off)", "!{x>=18} R X __T"] {
            let phi = parse(f);
            let g = gamma(&phi, &enc).unwrap();
            for t in [
                "[{x >= 21}] on ([{x >= 21}] off)",
                "[{}] T ([{x >= 18} {}] on [{x >= 18}] off)",
                "([{x >= 18, x >= 21}] T)",
            ] {
                let t = trace(t);
                assert_eq!(
                    eval_hyltl(&t, 1, &phi).unwrap(),
                    eval_ltl_lasso(&sigma(&t, &enc).unwrap(), &g).unwrap(),
                    "{f} on {t}"
                );
            }
        }
    }
}
