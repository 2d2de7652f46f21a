//! The end-to-end translation from a HyLTL formula to a Büchi hybrid automaton.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::buchi::{ltl_to_buchi, normalize_labels, BuchiAutomaton, BuchiError};
use crate::discrete::{gamma, make_encoding, ActionEncoding, DiscreteError, LtlFormula};
use crate::formula::{to_nnf, FormulaError, HyLtlFormula};
use crate::hybrid::{build_bha_with_origins, BhaLocation, BuchiHybridAutomaton, HybridError};
use crate::pi::{pi, PiError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Pi(#[from] PiError),
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
    #[error(transparent)]
    Buchi(#[from] BuchiError),
    #[error(transparent)]
    Hybrid(#[from] HybridError),
}

/// One line of the stage log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: &'static str,
    pub detail: String,
}

impl fmt::Display for StageRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.detail)
    }
}

/// Every intermediate result of a run.
#[derive(Debug, Clone)]
pub struct Translation {
    pub nnf: HyLtlFormula,
    /// The positive formula handed to the discretization: `nnf` itself or its
    /// split-action translation.
    pub positive: HyLtlFormula,
    pub used_pi: bool,
    pub encoding: ActionEncoding,
    pub gamma: LtlFormula,
    pub buchi: BuchiAutomaton,
    pub normalized: BuchiAutomaton,
    pub bha: BuchiHybridAutomaton,
    pub origins: Vec<BhaLocation>,
    pub log: Vec<StageRecord>,
}

fn record(log: &mut Vec<StageRecord>, stage: &'static str, detail: String) {
    log.push(StageRecord { stage, detail });
}

/// Translates up to the discrete formula. The split action is introduced
/// only when the NNF has a negated flow constraint.
pub fn to_discrete<A: AsRef<str>>(
    phi: &HyLtlFormula,
    actions: &[A],
    log: &mut Vec<StageRecord>,
) -> Result<(HyLtlFormula, HyLtlFormula, bool, ActionEncoding, LtlFormula), PipelineError> {
    let nnf = to_nnf(phi);
    record(log, "nnf", format!("size {} -> {}", phi.size(), nnf.size()));
    let (positive, used_pi) = if nnf.is_positive()? {
        record(log, "pi", "skipped: formula is positive".into());
        (nnf.clone(), false)
    } else {
        let p = pi(&nnf)?;
        record(log, "pi", format!("size {}", p.size()));
        (p, true)
    };
    let encoding = make_encoding(actions.iter().map(|a| a.as_ref()))?;
    let g = gamma(&positive, &encoding)?;
    record(log, "gamma", format!("size {}, {} bits", g.size(), encoding.n()));
    Ok((nnf, positive, used_pi, encoding, g))
}

/// Runs every stage. `external` replaces the internal LTL translation.
pub fn translate<A: AsRef<str>>(
    phi: &HyLtlFormula,
    actions: &[A],
    vars: &BTreeSet<String>,
    external: Option<BuchiAutomaton>,
) -> Result<Translation, PipelineError> {
    let mut log = Vec::new();
    let (nnf, positive, used_pi, encoding, g) = to_discrete(phi, actions, &mut log)?;
    let (buchi, source) = match external {
        Some(b) => (b, "imported"),
        None => (ltl_to_buchi(&g), "tableau"),
    };
    record(
        &mut log,
        "ba",
        format!("{source}: {} states, {} transitions", buchi.num_states(), buchi.num_transitions()),
    );
    let normalized = normalize_labels(&buchi, true, Some(&encoding))?;
    record(
        &mut log,
        "normalize",
        format!("{} transitions", normalized.num_transitions()),
    );
    let (bha, origins) = build_bha_with_origins(&normalized, &encoding, vars)?;
    record(
        &mut log,
        "bha",
        format!(
            "{} locations, {} edges, {} initial, {} final",
            bha.num_locations(),
            bha.edges().len(),
            bha.init().len(),
            bha.finals().len()
        ),
    );
    Ok(Translation {
        nnf,
        positive,
        used_pi,
        encoding,
        gamma: g,
        buchi,
        normalized,
        bha,
        origins,
        log,
    })
}
