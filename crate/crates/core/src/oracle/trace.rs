//! Abstract hybrid lasso traces.
//!
//! A trajectory is modelled by the finite sequence of constraint-truth
//! assignments it passes through. Each [`Atom`] is a total assignment over a
//! fixed [`Universe`] of flow constraints.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::constraint::FlowConstraint;
use crate::formula::Action;
use crate::syntax::{Cursor, ParseError};

pub const MAX_UNIVERSE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace syntax error at {0}")]
    Syntax(ParseError),
    #[error("constraint `{0}` is not part of the trace universe")]
    UnknownConstraint(String),
    #[error("universe has {0} constraints, at most {MAX_UNIVERSE} are supported")]
    UniverseTooLarge(usize),
    #[error("trajectory must contain at least one atom")]
    EmptyTrajectory,
    #[error("the loop of a lasso trace must be nonempty")]
    EmptyLoop,
    #[error("the loop contains no action of the restriction set")]
    LoopWithoutKeptAction,
}

impl From<ParseError> for TraceError {
    fn from(e: ParseError) -> Self {
        TraceError::Syntax(e)
    }
}

/// Ordered, duplicate-free set of flow constraints indexing atom bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Universe {
    constraints: Vec<FlowConstraint>,
}

impl Universe {
    pub fn new(constraints: impl IntoIterator<Item = FlowConstraint>) -> Result<Self, TraceError> {
        let set: BTreeSet<FlowConstraint> = constraints.into_iter().collect();
        if set.len() > MAX_UNIVERSE {
            return Err(TraceError::UniverseTooLarge(set.len()));
        }
        Ok(Universe {
            constraints: set.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn index_of(&self, f: &FlowConstraint) -> Option<usize> {
        self.constraints.binary_search(f).ok()
    }

    pub fn constraints(&self) -> &[FlowConstraint] {
        &self.constraints
    }

    /// Mask with one bit per constraint.
    pub fn full_mask(&self) -> u64 {
        if self.constraints.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.constraints.len()) - 1
        }
    }
}

/// Truth assignment at one instant: bit `i` set iff constraint `i` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(pub u64);

impl Atom {
    pub fn holds(self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }
}

/// Nonempty sequence of atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractTrajectory(Vec<Atom>);

impl AbstractTrajectory {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, TraceError> {
        if atoms.is_empty() {
            return Err(TraceError::EmptyTrajectory);
        }
        Ok(AbstractTrajectory(atoms))
    }

    pub fn single(atom: Atom) -> Self {
        AbstractTrajectory(vec![atom])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    /// Constraints holding at every instant.
    pub fn invariant_mask(&self) -> u64 {
        self.0.iter().fold(u64::MAX, |m, a| m & a.0)
    }

    /// The trajectory respects constraint `index` throughout.
    pub fn satisfies(&self, index: usize) -> bool {
        self.0.iter().all(|a| a.holds(index))
    }

    pub fn concat(&self, other: &AbstractTrajectory) -> AbstractTrajectory {
        let mut atoms = self.0.clone();
        atoms.extend_from_slice(&other.0);
        AbstractTrajectory(atoms)
    }

    /// Contiguous sub-trajectory `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<AbstractTrajectory, TraceError> {
        AbstractTrajectory::new(self.0[start..end].to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub trajectory: AbstractTrajectory,
    pub action: Action,
}

impl Step {
    pub fn new(trajectory: AbstractTrajectory, action: Action) -> Self {
        Step { trajectory, action }
    }
}

/// `stem · loop^ω` where every step is a trajectory followed by an action.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbstractLassoTrace {
    universe: Arc<Universe>,
    stem: Vec<Step>,
    cycle: Vec<Step>,
}

impl AbstractLassoTrace {
    pub fn new(universe: Arc<Universe>, stem: Vec<Step>, cycle: Vec<Step>) -> Result<Self, TraceError> {
        if cycle.is_empty() {
            return Err(TraceError::EmptyLoop);
        }
        Ok(AbstractLassoTrace {
            universe,
            stem,
            cycle,
        })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn stem(&self) -> &[Step] {
        &self.stem
    }

    pub fn cycle(&self) -> &[Step] {
        &self.cycle
    }

    /// Number of distinct step positions (`stem.len() + loop.len()`).
    pub fn len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Step at flattened index `i < len()`.
    pub fn step(&self, i: usize) -> &Step {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[i - self.stem.len()]
        }
    }

    /// Successor of a flattened index on the infinite unrolling.
    pub fn succ(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.stem.len()
        }
    }

    /// The `i`-th step of the infinite trace (0-based).
    pub fn step_at(&self, i: usize) -> &Step {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    pub fn actions(&self) -> BTreeSet<Action> {
        self.stem
            .iter()
            .chain(&self.cycle)
            .map(|s| s.action.clone())
            .collect()
    }

    /// Canonical lasso form: primitive loop, stem rolled back into the loop
    /// as far as possible. Equal infinite traces have equal normal forms.
    pub fn normalized(mut self) -> Self {
        let m = self.cycle.len();
        for p in 1..=m {
            if m % p == 0 && (p..m).all(|i| self.cycle[i] == self.cycle[i % p]) {
                self.cycle.truncate(p);
                break;
            }
        }
        while let Some(last) = self.stem.last() {
            if *last != *self.cycle.last().expect("nonempty loop") {
                break;
            }
            let s = self.stem.pop().expect("checked");
            self.cycle.pop();
            self.cycle.insert(0, s);
        }
        self
    }

    /// Drops every action outside `keep`, concatenating the trajectories
    /// around each dropped action.
    pub fn restrict(&self, keep: &BTreeSet<Action>) -> Result<AbstractLassoTrace, TraceError> {
        if !self.cycle.iter().any(|s| keep.contains(&s.action)) {
            return Err(TraceError::LoopWithoutKeptAction);
        }
        let mut stem = Vec::new();
        let mut pending: Option<AbstractTrajectory> = None;
        let push = |pending: &mut Option<AbstractTrajectory>, step: &Step, out: &mut Vec<Step>| {
            let traj = match pending.take() {
                Some(p) => p.concat(&step.trajectory),
                None => step.trajectory.clone(),
            };
            if keep.contains(&step.action) {
                out.push(Step::new(traj, step.action.clone()));
            } else {
                *pending = Some(traj);
            }
        };
        for step in &self.stem {
            push(&mut pending, step, &mut stem);
        }
        // One pass through the loop settles the carried-over prefix; the
        // second pass produces the periodic part.
        for step in &self.cycle {
            push(&mut pending, step, &mut stem);
        }
        let mut cycle = Vec::new();
        for step in &self.cycle {
            push(&mut pending, step, &mut cycle);
        }
        debug_assert!(pending.is_some() || keep.contains(&self.cycle.last().unwrap().action));
        // `pending` now equals the carry at the end of the first pass, which
        // is exactly what prefixed the first kept step of the second pass.
        Ok(AbstractLassoTrace::new(self.universe.clone(), stem, cycle)?.normalized())
    }

    /// Parses the trace literal syntax `[{f, g} {f}] on [{f}] T ( [{g}] off )`.
    ///
    /// Each `[...]` is a trajectory of atoms; an atom lists the constraints
    /// true at that instant. The parenthesized suffix is the loop. `T` is the
    /// split action. Without an explicit universe it is the set of mentioned
    /// constraints.
    pub fn parse(text: &str, universe: Option<Arc<Universe>>) -> Result<Self, TraceError> {
        let mut cur = Cursor::new(text);
        let mut raw_stem = Vec::new();
        let mut raw_cycle = Vec::new();
        let mut in_loop = false;
        let mut mentioned = BTreeSet::new();
        loop {
            if cur.at_end() {
                break;
            }
            if !in_loop && cur.eat("(") {
                in_loop = true;
                continue;
            }
            if in_loop && cur.eat(")") {
                if !cur.at_end() {
                    return Err(cur.error("the loop must end the trace").into());
                }
                break;
            }
            cur.expect("[")?;
            let mut atoms = Vec::new();
            while !cur.eat("]") {
                cur.expect("{")?;
                let start = cur.pos();
                let Some(end) = cur.find_matching('{', '}') else {
                    return Err(cur.error("unterminated `{`").into());
                };
                let mut set = Vec::new();
                let body = &cur.rest()[..end - start];
                let mut offset = start;
                for part in body.split(',') {
                    if !part.trim().is_empty() {
                        let mut sub = cur.slice(offset, offset + part.len());
                        let c = crate::constraint::parse_flow(&mut sub, None)
                            .map_err(|e| match e {
                                crate::constraint::ConstraintError::Parse(p) => TraceError::Syntax(p),
                                other => TraceError::Syntax(cur.error_at(offset, other.to_string())),
                            })?;
                        if !sub.at_end() {
                            return Err(sub.error("unexpected text in atom").into());
                        }
                        mentioned.insert(c.clone());
                        set.push(c);
                    }
                    offset += part.len() + 1;
                }
                cur.set_pos(end + 1);
                atoms.push(set);
            }
            if atoms.is_empty() {
                return Err(TraceError::EmptyTrajectory);
            }
            let name = cur.expect_ident("an action")?;
            let action = if name == "T" {
                Action::split()
            } else {
                Action::new(name)
            };
            if in_loop {
                raw_cycle.push((atoms, action));
            } else {
                raw_stem.push((atoms, action));
            }
        }
        let universe = match universe {
            Some(u) => u,
            None => Arc::new(Universe::new(mentioned)?),
        };
        let build = |raw: Vec<(Vec<Vec<FlowConstraint>>, Action)>| -> Result<Vec<Step>, TraceError> {
            raw.into_iter()
                .map(|(atoms, action)| {
                    let atoms = atoms
                        .into_iter()
                        .map(|set| {
                            set.iter().try_fold(0u64, |m, c| {
                                universe
                                    .index_of(c)
                                    .map(|i| m | 1 << i)
                                    .ok_or_else(|| TraceError::UnknownConstraint(c.to_string()))
                            })
                        })
                        .map(|m| m.map(Atom))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Step::new(AbstractTrajectory::new(atoms)?, action))
                })
                .collect()
        };
        let stem = build(raw_stem)?;
        let cycle = build(raw_cycle)?;
        AbstractLassoTrace::new(universe, stem, cycle)
    }
}

impl fmt::Display for AbstractLassoTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_step = |f: &mut fmt::Formatter<'_>, s: &Step| -> fmt::Result {
            f.write_str("[")?;
            for (i, atom) in s.trajectory.atoms().iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                f.write_str("{")?;
                let names: Vec<&str> = (0..self.universe.len())
                    .filter(|&k| atom.holds(k))
                    .map(|k| self.universe.constraints()[k].as_str())
                    .collect();
                f.write_str(&names.join(", "))?;
                f.write_str("}")?;
            }
            write!(f, "] {}", s.action)
        };
        for s in &self.stem {
            write_step(f, s)?;
            f.write_str(" ")?;
        }
        f.write_str("(")?;
        for (i, s) in self.cycle.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write_step(f, s)?;
        }
        f.write_str(")")
    }
}

/// Free function form of [`AbstractLassoTrace::restrict`].
pub fn restrict(beta: &AbstractLassoTrace, keep: &BTreeSet<Action>) -> Result<AbstractLassoTrace, TraceError> {
    beta.restrict(keep)
}
