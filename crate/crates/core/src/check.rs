//! Property suites comparing translation stages with the oracles.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::buchi::BuchiAutomaton;
use crate::constraint::FlowConstraint;
use crate::discrete::{gamma, sigma, ActionEncoding, LtlFormula};
use crate::formula::{Action, HyLtlFormula};
use crate::gen::{TraceSpace, WordSpace};
use crate::hybrid::BuchiHybridAutomaton;
use crate::oracle::{
    AbstractLassoTrace, AbstractTrajectory, Atom, BhaError, CompiledBha, CompiledBuchi, EvalError,
    HyLtlEvaluator, LtlEvaluator, Step, TraceError, Universe,
};
use crate::pi::pi;
use crate::pipeline::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Bha(#[from] BhaError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("dual `{0}` of a negated constraint is itself an atom of the formula")]
    DualInUniverse(String),
}

const EXAMPLES: usize = 5;

/// Outcome of one suite.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub cases: u64,
    pub mismatches: u64,
    /// Cases the bounded search could not decide.
    pub exhausted: u64,
    /// The first few mismatching cases.
    pub examples: Vec<String>,
}

impl Report {
    fn mismatch(&mut self, describe: impl FnOnce() -> String) {
        self.mismatches += 1;
        if self.examples.len() < EXAMPLES {
            self.examples.push(describe());
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }

    pub fn absorb(&mut self, other: Report) {
        self.cases += other.cases;
        self.mismatches += other.mismatches;
        self.exhausted += other.exhausted;
        let room = EXAMPLES.saturating_sub(self.examples.len());
        self.examples.extend(other.examples.into_iter().take(room));
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cases, {} mismatches, {} undecided within bound",
            self.cases, self.mismatches, self.exhausted
        )?;
        for e in &self.examples {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

/// The flow atoms of `phi` as a trace universe.
pub fn formula_universe(phi: &HyLtlFormula) -> Result<Arc<Universe>, CheckError> {
    Ok(Arc::new(Universe::new(phi.flow_atoms())?))
}

/// `base` plus the duals of `negated`. Fails if a dual already is in `base`.
pub fn dual_universe(base: &Universe, negated: &BTreeSet<FlowConstraint>) -> Result<Arc<Universe>, CheckError> {
    let mut all: Vec<FlowConstraint> = base.constraints().to_vec();
    for f in negated {
        let d = f.dual();
        if base.index_of(&d).is_some() {
            return Err(CheckError::DualInUniverse(d.to_string()));
        }
        all.push(d);
    }
    Ok(Arc::new(Universe::new(all)?))
}

/// Rewrites `alpha` over `ext`, a superset of its universe whose extra
/// members are duals of members: a dual holds at an atom iff its
/// original does not.
pub fn extend_trace(alpha: &AbstractLassoTrace, ext: &Arc<Universe>) -> AbstractLassoTrace {
    let base = alpha.universe();
    let sources: Vec<(usize, bool)> = ext
        .constraints()
        .iter()
        .map(|c| match base.index_of(c) {
            Some(i) => (i, true),
            None => (
                base.index_of(&c.dual()).expect("extra constraint is a dual"),
                false,
            ),
        })
        .collect();
    let map_atom = |a: &Atom| {
        let mut m = 0u64;
        for (j, &(i, same)) in sources.iter().enumerate() {
            if a.holds(i) == same {
                m |= 1 << j;
            }
        }
        Atom(m)
    };
    let map_step = |s: &Step| {
        let atoms = s.trajectory.atoms().iter().map(map_atom).collect();
        Step::new(AbstractTrajectory::new(atoms).expect("nonempty"), s.action.clone())
    };
    AbstractLassoTrace::new(
        ext.clone(),
        alpha.stem().iter().map(map_step).collect(),
        alpha.cycle().iter().map(map_step).collect(),
    )
    .expect("nonempty cycle")
}

/// Ways to cut one step with at most `k` split actions.
fn split_step(step: &Step, k: usize) -> Vec<Vec<Step>> {
    let atoms = step.trajectory.atoms();
    let cuts = atoms.len() - 1;
    let mut out = Vec::new();
    for set in 0u32..1 << cuts {
        if set.count_ones() as usize > k {
            continue;
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        for c in 0..cuts {
            if set >> c & 1 == 1 {
                pieces.push(atoms[start..=c].to_vec());
                start = c + 1;
            }
        }
        pieces.push(atoms[start..].to_vec());
        let n = pieces.len();
        out.push(
            pieces
                .into_iter()
                .enumerate()
                .map(|(i, p)| {
                    let action = if i + 1 == n { step.action.clone() } else { Action::split() };
                    Step::new(AbstractTrajectory::new(p).expect("nonempty piece"), action)
                })
                .collect(),
        );
    }
    out
}

/// Every `β` obtained from `alpha` by cutting each trajectory with at most
/// `k` split actions, the same way on every pass through the cycle.
/// Restricting any of them to the user actions gives back `alpha`.
pub fn splits(alpha: &AbstractLassoTrace, k: usize) -> Vec<AbstractLassoTrace> {
    let steps: Vec<&Step> = alpha.stem().iter().chain(alpha.cycle()).collect();
    let options: Vec<Vec<Vec<Step>>> = steps.iter().map(|s| split_step(s, k)).collect();
    let s = alpha.stem().len();
    let mut out = Vec::new();
    let mut choice = vec![0usize; steps.len()];
    loop {
        let mut stem = Vec::new();
        let mut cycle = Vec::new();
        for (i, &c) in choice.iter().enumerate() {
            let target = if i < s { &mut stem } else { &mut cycle };
            target.extend(options[i][c].iter().cloned());
        }
        out.push(AbstractLassoTrace::new(alpha.universe().clone(), stem, cycle).expect("nonempty cycle"));
        let mut i = 0;
        loop {
            if i == choice.len() {
                return out;
            }
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn longest_trajectory(alpha: &AbstractLassoTrace) -> usize {
    alpha
        .stem()
        .iter()
        .chain(alpha.cycle())
        .map(|s| s.trajectory.atoms().len())
        .max()
        .unwrap_or(0)
}

/// `α, 1 ⊩ φ` iff `Σ(α), 1 ⊩ γ(φ)` on every trace of `space`.
pub fn discretization(
    phi: &HyLtlFormula,
    enc: &ActionEncoding,
    space: &TraceSpace,
    representatives: bool,
) -> Result<Report, CheckError> {
    let g = gamma(phi, enc).map_err(PipelineError::from)?;
    let hev = HyLtlEvaluator::new(phi, space.universe())?;
    let lev = LtlEvaluator::new(&g, space.universe())?;
    let mut report = Report::default();
    space.for_each(representatives, |alpha| {
        report.cases += 1;
        let w = sigma(alpha, enc).expect("trace actions are encoded");
        let (a, b) = (hev.eval(alpha), lev.eval(&w));
        if a != b {
            report.mismatch(|| format!("{phi} on {alpha}: trace {a}, word {b}"));
        }
    });
    Ok(report)
}

/// Both directions of the split-action translation on each of `traces`,
/// searching every way to cut trajectories with at most `k` split actions.
/// A satisfied trace without a satisfying cut counts as a mismatch only if
/// the search covered every cut of it.
pub fn split_translation<'a>(
    phi: &HyLtlFormula,
    traces: impl IntoIterator<Item = &'a AbstractLassoTrace>,
    k: usize,
) -> Result<Report, CheckError> {
    let translated = pi(phi).map_err(PipelineError::from)?;
    let mut report = Report::default();
    let mut compiled: Option<(Arc<Universe>, HyLtlEvaluator, HyLtlEvaluator)> = None;
    for alpha in traces {
        if compiled.as_ref().is_none_or(|(u, ..)| u.constraints() != alpha.universe().constraints()) {
            let ext = dual_universe(alpha.universe(), &phi.negated_flow_atoms())?;
            let a = HyLtlEvaluator::new(phi, &ext)?;
            let b = HyLtlEvaluator::new(&translated, &ext)?;
            compiled = Some((ext, a, b));
        }
        let (ext, hev, pev) = compiled.as_ref().expect("compiled");
        let alpha = extend_trace(alpha, ext);
        report.cases += 1;
        let expected = hev.eval(&alpha);
        let mut found = false;
        for beta in splits(&alpha, k) {
            if pev.eval(&beta) {
                found = true;
                if !expected {
                    report.mismatch(|| format!("{phi}: {beta} satisfies the translation, {alpha} violates the formula"));
                    break;
                }
            }
        }
        if expected && !found {
            if longest_trajectory(&alpha) <= k + 1 {
                report.mismatch(|| format!("{phi}: {alpha} satisfies the formula, no cut satisfies the translation"));
            } else {
                report.exhausted += 1;
            }
        }
    }
    Ok(report)
}

/// Adding flow atoms to letters never falsifies `g` at any position, over
/// every word of `space` and every pointwise flow superset of it.
pub fn upward_closure(g: &LtlFormula, space: &WordSpace) -> Result<Report, CheckError> {
    let lev = LtlEvaluator::new(g, &space.universe)?;
    let full = space.universe.full_mask();
    let mut report = Report::default();
    space.for_each(|w| {
        let base = lev.eval_all(w);
        if !base.contains(&true) {
            return;
        }
        let letters: Vec<_> = (0..w.len()).map(|p| w.letter(p)).collect();
        // Odometer over the submasks of each letter's missing flows.
        let missing: Vec<u64> = letters.iter().map(|l| full & !l.flows).collect();
        let mut extra = vec![0u64; letters.len()];
        loop {
            let mut p = 0;
            loop {
                if p == extra.len() {
                    return;
                }
                extra[p] = (extra[p].wrapping_sub(missing[p])) & missing[p];
                if extra[p] != 0 {
                    break;
                }
                p += 1;
            }
            let grown: Vec<_> = letters
                .iter()
                .zip(&extra)
                .map(|(l, e)| crate::discrete::Letter { flows: l.flows | e, bits: l.bits })
                .collect();
            let s = w.stem().len();
            let v = crate::discrete::DiscreteWord::new(w.universe().clone(), grown[..s].to_vec(), grown[s..].to_vec())
                .expect("nonempty cycle");
            report.cases += 1;
            let after = lev.eval_all(&v);
            if let Some(p) = (0..base.len()).find(|&p| base[p] && !after[p]) {
                report.mismatch(|| format!("{g}: holds at {p} of {w}, fails on {v}"));
            }
        }
    });
    Ok(report)
}

/// The automaton accepts exactly the words of `space` satisfying `g`.
pub fn ltl_buchi(g: &LtlFormula, aut: &BuchiAutomaton, space: &WordSpace) -> Result<Report, CheckError> {
    let lev = LtlEvaluator::new(g, &space.universe)?;
    let cb = CompiledBuchi::new(aut, &space.universe);
    let mut report = Report::default();
    space.for_each(|w| {
        report.cases += 1;
        let (a, b) = (lev.eval(w), cb.accepts(w));
        if a != b {
            report.mismatch(|| format!("{g} on {w}: formula {a}, automaton {b}"));
        }
    });
    Ok(report)
}

/// The automaton built for `phi` accepts `α` iff `α, 1 ⊩ φ`. With
/// `split` set the automaton reads traces cut by split actions, and `α`
/// counts as accepted when one of its cuts with at most `k` split actions
/// per trajectory is.
pub fn bha_equivalence<'a>(
    phi: &HyLtlFormula,
    bha: &BuchiHybridAutomaton,
    traces: impl IntoIterator<Item = &'a AbstractLassoTrace>,
    split: bool,
    k: usize,
) -> Result<Report, CheckError> {
    let mut report = Report::default();
    let mut compiled: Option<(Arc<Universe>, HyLtlEvaluator)> = None;
    let negated = phi.to_nnf().negated_flow_atoms();
    let mut ext_universe: Option<Arc<Universe>> = None;
    for alpha in traces {
        if ext_universe.as_ref().is_none_or(|_| {
            compiled
                .as_ref()
                .is_none_or(|(u, _)| !alpha.universe().constraints().iter().all(|c| u.index_of(c).is_some()))
        }) {
            let ext = dual_universe(alpha.universe(), &negated)?;
            compiled = Some((ext.clone(), HyLtlEvaluator::new(phi, &ext)?));
            ext_universe = Some(ext);
        }
        let (ext, hev) = compiled.as_ref().expect("compiled");
        let cb = CompiledBha::new(bha, ext)?;
        let alpha = extend_trace(alpha, ext);
        report.cases += 1;
        let expected = hev.eval(&alpha);
        let got = if split {
            splits(&alpha, k).iter().any(|b| cb.accepts(b))
        } else {
            cb.accepts(&alpha)
        };
        if expected != got {
            if expected && split && longest_trajectory(&alpha) > k + 1 {
                report.exhausted += 1;
            } else {
                report.mismatch(|| format!("{phi} on {alpha}: formula {expected}, automaton {got}"));
            }
        }
    }
    Ok(report)
}
