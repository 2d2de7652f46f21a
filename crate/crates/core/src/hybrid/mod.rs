//! Hybrid automata, their Büchi variant, the construction from a Büchi
//! automaton, parallel composition and text formats.

mod build;
mod compose;
mod dot;
mod format;
mod hoa;
mod monitor;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;

use thiserror::Error;

use crate::constraint::{ConstraintError, FlowConstraint, JumpConstraint};
use crate::formula::Action;
use crate::syntax::ParseError;

pub use build::{build_bha, build_bha_with_origins, BhaLocation};
pub use compose::{compose, ground_system};
pub use dot::export_dot;
pub use format::{export_bha, export_ha, parse_bha, parse_ha};
pub use hoa::export_bha_hoa;
pub use monitor::{export_monitor, parse_monitor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HybridError {
    #[error("syntax error at {0}")]
    Syntax(ParseError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("location `{0}` is declared twice")]
    DuplicateLocation(String),
    #[error("edge {0} -{1}-> {2} is declared twice")]
    DuplicateEdge(String, String, String),
    #[error("action `{0}` is not declared")]
    UndeclaredAction(String),
    #[error("variable `{0}` is not declared")]
    UndeclaredVariable(String),
    #[error("variable sets differ: system has {{{0}}}, property has {{{1}}}")]
    VariableMismatch(String, String),
    #[error("action `{0}` is not shared by system and property")]
    ActionMismatch(String),
    #[error("input automaton labels are not normalized cocubes with positive flow atoms")]
    NotNormalized,
    #[error("automaton has no locations")]
    NoLocations,
    #[error("automaton has no initial location")]
    NoInitial,
}

impl From<ParseError> for HybridError {
    fn from(e: ParseError) -> Self {
        HybridError::Syntax(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub action: Action,
    pub dst: usize,
    /// Conjunction of jump constraints; empty means `⊤`.
    pub reset: BTreeSet<JumpConstraint>,
}

/// `⟨Loc, X, A, Edg, Dyn, Rst, Init⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridAutomaton {
    vars: BTreeSet<String>,
    actions: BTreeSet<Action>,
    names: Vec<String>,
    dynamics: Vec<BTreeSet<FlowConstraint>>,
    edges: Vec<Edge>,
    init: BTreeSet<usize>,
    by_name: BTreeMap<String, usize>,
    by_edge: BTreeMap<(usize, Action, usize), usize>,
}

impl HybridAutomaton {
    pub fn new<V, A>(vars: V, actions: A) -> Self
    where
        V: IntoIterator,
        V::Item: Into<String>,
        A: IntoIterator<Item = Action>,
    {
        HybridAutomaton {
            vars: vars.into_iter().map(Into::into).collect(),
            actions: actions.into_iter().collect(),
            names: Vec::new(),
            dynamics: Vec::new(),
            edges: Vec::new(),
            init: BTreeSet::new(),
            by_name: BTreeMap::new(),
            by_edge: BTreeMap::new(),
        }
    }

    fn check_vars<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<(), HybridError> {
        for n in names {
            if !self.vars.contains(n) {
                return Err(HybridError::UndeclaredVariable(n.to_string()));
            }
        }
        Ok(())
    }

    pub fn add_location(
        &mut self,
        name: &str,
        dynamics: impl IntoIterator<Item = FlowConstraint>,
    ) -> Result<usize, HybridError> {
        if self.by_name.contains_key(name) {
            return Err(HybridError::DuplicateLocation(name.to_string()));
        }
        let dynamics: BTreeSet<FlowConstraint> = dynamics.into_iter().collect();
        for c in &dynamics {
            let vars = c.variables();
            self.check_vars(vars.iter().map(|v| v.name.as_str()))?;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.dynamics.push(dynamics);
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_edge(
        &mut self,
        src: usize,
        action: Action,
        dst: usize,
        reset: impl IntoIterator<Item = JumpConstraint>,
    ) -> Result<(), HybridError> {
        for l in [src, dst] {
            if l >= self.names.len() {
                return Err(HybridError::UnknownLocation(format!("#{l}")));
            }
        }
        if !self.actions.contains(&action) {
            return Err(HybridError::UndeclaredAction(action.name().to_string()));
        }
        if self.edge_index(src, &action, dst).is_some() {
            return Err(HybridError::DuplicateEdge(
                self.names[src].clone(),
                action.name().to_string(),
                self.names[dst].clone(),
            ));
        }
        let reset: BTreeSet<JumpConstraint> = reset.into_iter().collect();
        for c in &reset {
            let vars = c.variables();
            self.check_vars(vars.iter().map(|v| v.name.as_str()))?;
        }
        self.by_edge.insert((src, action.clone(), dst), self.edges.len());
        self.edges.push(Edge {
            src,
            action,
            dst,
            reset,
        });
        Ok(())
    }

    pub fn add_init(&mut self, loc: usize) -> Result<(), HybridError> {
        if loc >= self.names.len() {
            return Err(HybridError::UnknownLocation(format!("#{loc}")));
        }
        self.init.insert(loc);
        Ok(())
    }

    pub fn edge_index(&self, src: usize, action: &Action, dst: usize) -> Option<usize> {
        self.by_edge.get(&(src, action.clone(), dst)).copied()
    }

    pub fn vars(&self) -> &BTreeSet<String> {
        &self.vars
    }

    pub fn actions(&self) -> &BTreeSet<Action> {
        &self.actions
    }

    pub fn num_locations(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, loc: usize) -> &str {
        &self.names[loc]
    }

    pub fn location(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn dynamics(&self, loc: usize) -> &BTreeSet<FlowConstraint> {
        &self.dynamics[loc]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn init(&self) -> &BTreeSet<usize> {
        &self.init
    }

    /// Every flow constraint used by some location.
    pub fn flow_constraints(&self) -> BTreeSet<FlowConstraint> {
        self.dynamics.iter().flatten().cloned().collect()
    }

    /// Outgoing edges per location.
    pub fn successors(&self) -> Vec<Vec<&Edge>> {
        let mut out = vec![Vec::new(); self.names.len()];
        for e in &self.edges {
            out[e.src].push(e);
        }
        out
    }
}

/// A hybrid automaton with a set of final locations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiHybridAutomaton {
    ha: HybridAutomaton,
    finals: BTreeSet<usize>,
}

impl BuchiHybridAutomaton {
    pub fn new(ha: HybridAutomaton) -> Self {
        BuchiHybridAutomaton {
            ha,
            finals: BTreeSet::new(),
        }
    }

    /// Every location final: the plain automaton read as a Büchi one.
    pub fn all_final(ha: HybridAutomaton) -> Self {
        let finals = (0..ha.num_locations()).collect();
        BuchiHybridAutomaton { ha, finals }
    }

    pub fn add_final(&mut self, loc: usize) -> Result<(), HybridError> {
        if loc >= self.ha.num_locations() {
            return Err(HybridError::UnknownLocation(format!("#{loc}")));
        }
        self.finals.insert(loc);
        Ok(())
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn is_final(&self, loc: usize) -> bool {
        self.finals.contains(&loc)
    }

    pub fn ha(&self) -> &HybridAutomaton {
        &self.ha
    }

    pub fn ha_mut(&mut self) -> &mut HybridAutomaton {
        &mut self.ha
    }

    pub fn into_ha(self) -> HybridAutomaton {
        self.ha
    }
}

impl Deref for BuchiHybridAutomaton {
    type Target = HybridAutomaton;

    fn deref(&self) -> &HybridAutomaton {
        &self.ha
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn flow(s: &str) -> FlowConstraint {
        FlowConstraint::parse(s, None).unwrap()
    }

    pub fn jump(s: &str) -> JumpConstraint {
        JumpConstraint::parse(s, None).unwrap()
    }

    /// Two-mode thermostat.
    pub fn thermostat() -> HybridAutomaton {
        let mut h = HybridAutomaton::new(["x"], [Action::new("on"), Action::new("off")]);
        let on = h
            .add_location("heat_on", [flow("x' = 5 - 0.1 * x"), flow("x <= 22")])
            .unwrap();
        let off = h
            .add_location("heat_off", [flow("x' = -0.1 * x"), flow("x >= 18")])
            .unwrap();
        h.add_edge(on, Action::new("off"), off, [jump("~x >= 21"), jump("x = ~x")])
            .unwrap();
        h.add_edge(off, Action::new("on"), on, [jump("~x <= 19"), jump("x = ~x")])
            .unwrap();
        h.add_init(off).unwrap();
        h
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn validation() {
        let mut h = HybridAutomaton::new(["x"], [Action::new("a")]);
        assert_eq!(
            h.add_location("l", [flow("y >= 1")]),
            Err(HybridError::UndeclaredVariable("y".into()))
        );
        let l = h.add_location("l", [flow("x' >= 1")]).unwrap();
        assert!(matches!(h.add_location("l", []), Err(HybridError::DuplicateLocation(_))));
        assert_eq!(
            h.add_edge(l, Action::new("b"), l, []),
            Err(HybridError::UndeclaredAction("b".into()))
        );
        h.add_edge(l, Action::new("a"), l, [jump("x = ~x")]).unwrap();
        assert!(matches!(h.add_edge(l, Action::new("a"), l, []), Err(HybridError::DuplicateEdge(..))));
        assert!(h.add_init(3).is_err());
    }

    #[test]
    fn thermostat_fixture_is_well_formed() {
        let h = thermostat();
        assert_eq!(h.num_locations(), 2);
        assert_eq!(h.edges().len(), 2);
        assert_eq!(h.init().len(), 1);
    }
}
