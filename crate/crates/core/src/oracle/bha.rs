//! Acceptance of abstract lasso traces by Büchi hybrid automata.

use std::collections::BTreeMap;

use thiserror::Error;

use super::emptiness::nested_dfs;
use super::trace::{AbstractLassoTrace, Universe};
use crate::formula::Action;
use crate::hybrid::BuchiHybridAutomaton;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BhaError {
    #[error("flow constraint `{0}` is not part of the trace universe")]
    OutsideUniverse(String),
    #[error("edge {0} -{1}-> {2} has a jump constraint, which abstract traces cannot evaluate")]
    NonTrivialReset(String, String, String),
}

/// A Büchi hybrid automaton prepared for acceptance queries over one universe.
pub struct CompiledBha<'a> {
    h: &'a BuchiHybridAutomaton,
    /// Required constraints of every location as a universe mask.
    dyn_mask: Vec<u64>,
    /// Successors per location, keyed by action.
    succ: Vec<BTreeMap<&'a Action, Vec<usize>>>,
}

impl<'a> CompiledBha<'a> {
    /// Fails on edges carrying jump constraints.
    pub fn new(h: &'a BuchiHybridAutomaton, universe: &Universe) -> Result<Self, BhaError> {
        Self::build(h, universe, false)
    }

    /// Treats every jump constraint as `⊤`.
    pub fn ignoring_resets(h: &'a BuchiHybridAutomaton, universe: &Universe) -> Result<Self, BhaError> {
        Self::build(h, universe, true)
    }

    fn build(h: &'a BuchiHybridAutomaton, universe: &Universe, ignore_resets: bool) -> Result<Self, BhaError> {
        let mut dyn_mask = Vec::with_capacity(h.num_locations());
        for l in 0..h.num_locations() {
            let mut m = 0u64;
            for c in h.dynamics(l) {
                let i = universe
                    .index_of(c)
                    .ok_or_else(|| BhaError::OutsideUniverse(c.to_string()))?;
                m |= 1 << i;
            }
            dyn_mask.push(m);
        }
        let mut succ: Vec<BTreeMap<&Action, Vec<usize>>> = vec![BTreeMap::new(); h.num_locations()];
        for e in h.edges() {
            if !ignore_resets && !e.reset.is_empty() {
                return Err(BhaError::NonTrivialReset(
                    h.name(e.src).to_string(),
                    e.action.name().to_string(),
                    h.name(e.dst).to_string(),
                ));
            }
            succ[e.src].entry(&e.action).or_default().push(e.dst);
        }
        Ok(CompiledBha { h, dyn_mask, succ })
    }

    /// Some run visits a final location infinitely often. A run enters
    /// location `ℓᵢ` with trajectory `τᵢ` satisfying `Dyn(ℓᵢ)` throughout and
    /// leaves it along an edge labelled `aᵢ`.
    pub fn accepts(&self, alpha: &AbstractLassoTrace) -> bool {
        let masks: Vec<u64> = (0..alpha.len())
            .map(|p| alpha.step(p).trajectory.invariant_mask())
            .collect();
        let fits = |l: usize, p: usize| self.dyn_mask[l] & !masks[p] == 0;
        const ROOT: usize = usize::MAX;
        let succ = |(l, p): (usize, usize)| -> Vec<(usize, usize)> {
            if l == ROOT {
                return self.h.init().iter().filter(|&&i| fits(i, 0)).map(|&i| (i, 0)).collect();
            }
            let np = alpha.succ(p);
            match self.succ[l].get(&alpha.step(p).action) {
                Some(ds) => ds.iter().filter(|&&m| fits(m, np)).map(|&m| (m, np)).collect(),
                None => Vec::new(),
            }
        };
        nested_dfs((ROOT, 0), succ, |(l, _)| l != ROOT && self.h.is_final(l))
    }
}

/// `α ∈ L(h)`; `h` must have only `⊤` resets.
pub fn bha_accepts(h: &BuchiHybridAutomaton, alpha: &AbstractLassoTrace) -> Result<bool, BhaError> {
    Ok(CompiledBha::new(h, alpha.universe())?.accepts(alpha))
}

/// `α ∈ L(h)` reading every jump constraint as `⊤`.
pub fn bha_accepts_ignoring_resets(
    h: &BuchiHybridAutomaton,
    alpha: &AbstractLassoTrace,
) -> Result<bool, BhaError> {
    Ok(CompiledBha::ignoring_resets(h, alpha.universe())?.accepts(alpha))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::sync::Arc;

    use super::*;
    use crate::buchi::{ltl_to_buchi, normalize_labels, BuchiAutomaton};
    use crate::constraint::FlowConstraint;
    use crate::discrete::{gamma, make_encoding};
    use crate::formula::{parse_hyltl, Declarations};
    use crate::hybrid::{build_bha, HybridAutomaton};

    fn hot() -> Arc<Universe> {
        Arc::new(Universe::new([FlowConstraint::parse("x >= 21", None).unwrap()]).unwrap())
    }

    fn safety_bha() -> BuchiHybridAutomaton {
        let decl = Declarations::new(["x"], ["on", "off"]);
        let phi = parse_hyltl("F({x >= 21} & X on)", &decl).unwrap();
        let enc = make_encoding(["on", "off"]).unwrap();
        let ba = normalize_labels(&ltl_to_buchi(&gamma(&phi, &enc).unwrap()), true, Some(&enc)).unwrap();
        build_bha(&ba, &enc, &BTreeSet::from(["x".to_string()])).unwrap()
    }

    #[test]
    fn universal_bha_accepts_everything() {
        let enc = make_encoding(["on", "off"]).unwrap();
        let h = build_bha(&BuchiAutomaton::universal(), &enc, &BTreeSet::new()).unwrap();
        for t in ["([{}] on)", "[{x >= 21}] off ([{}{x >= 21}] __T)"] {
            let a = AbstractLassoTrace::parse(t, Some(hot())).unwrap();
            assert!(bha_accepts(&h, &a).unwrap(), "{t}");
        }
    }

    #[test]
    fn thermostat_safety_runs() {
        let h = safety_bha();
        let yes = AbstractLassoTrace::parse("[{x >= 21}] on ([{x >= 21}] off)", Some(hot())).unwrap();
        assert!(bha_accepts(&h, &yes).unwrap());
        for t in ["[{}] on ([{}] off)", "([{} {}] on [{}] off)", "[{} {x >= 21}] on ([{}] on)"] {
            let a = AbstractLassoTrace::parse(t, Some(hot())).unwrap();
            assert!(!bha_accepts(&h, &a).unwrap(), "{t}");
        }
        let late_off = AbstractLassoTrace::parse("[{x >= 21}] off ([{}] on)", Some(hot())).unwrap();
        assert!(!bha_accepts(&h, &late_off).unwrap());
    }

    #[test]
    fn resets_and_universe_are_checked() {
        let mut h = HybridAutomaton::new(["x"], [Action::new("a")]);
        let l = h
            .add_location("l", [FlowConstraint::parse("x <= 1", None).unwrap()])
            .unwrap();
        h.add_edge(l, Action::new("a"), l, [crate::constraint::JumpConstraint::keep("x")])
            .unwrap();
        h.add_init(l).unwrap();
        let b = BuchiHybridAutomaton::all_final(h);
        let u = Arc::new(Universe::new([FlowConstraint::parse("x <= 1", None).unwrap()]).unwrap());
        let a = AbstractLassoTrace::parse("([{x <= 1}] a)", Some(u)).unwrap();
        assert!(matches!(bha_accepts(&b, &a), Err(BhaError::NonTrivialReset(..))));
        assert!(bha_accepts_ignoring_resets(&b, &a).unwrap());
        let other = AbstractLassoTrace::parse("([{x >= 21}] a)", Some(hot())).unwrap();
        assert!(matches!(
            bha_accepts_ignoring_resets(&b, &other),
            Err(BhaError::OutsideUniverse(_))
        ));
    }
}
