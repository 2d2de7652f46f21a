//! Construction of a Büchi hybrid automaton from a normalized Büchi automaton.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{BuchiHybridAutomaton, HybridAutomaton, HybridError};
use crate::buchi::{BuchiAutomaton, Cocube};
use crate::constraint::FlowConstraint;
use crate::discrete::ActionEncoding;

/// The pair `(q, C)` a location was created for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BhaLocation {
    pub state: usize,
    pub constraints: BTreeSet<FlowConstraint>,
}

pub fn build_bha(
    aut: &BuchiAutomaton,
    enc: &ActionEncoding,
    vars: &BTreeSet<String>,
) -> Result<BuchiHybridAutomaton, HybridError> {
    build_bha_with_origins(aut, enc, vars).map(|(h, _)| h)
}

/// Like [`build_bha`], also returning the `(q, C)` pair of every location.
pub fn build_bha_with_origins(
    aut: &BuchiAutomaton,
    enc: &ActionEncoding,
    vars: &BTreeSet<String>,
) -> Result<(BuchiHybridAutomaton, Vec<BhaLocation>), HybridError> {
    if !aut.is_normalized() {
        return Err(HybridError::NotNormalized);
    }
    let trans = aut.cocube_transitions().ok_or(HybridError::NotNormalized)?;
    let mut out_of: Vec<Vec<(&Cocube, usize)>> = vec![Vec::new(); aut.num_states()];
    for (src, cube, dst) in &trans {
        out_of[*src].push((cube, *dst));
    }
    let alphabet: Vec<_> = enc
        .alphabet()
        .into_iter()
        .map(|a| {
            let bits = enc.bits(&a).expect("alphabet is encoded");
            (a, bits)
        })
        .collect();

    let mut index: BTreeMap<BhaLocation, usize> = BTreeMap::new();
    let mut origins: Vec<BhaLocation> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |loc: BhaLocation, origins: &mut Vec<BhaLocation>, queue: &mut VecDeque<usize>| {
        *index.entry(loc.clone()).or_insert_with(|| {
            origins.push(loc);
            queue.push_back(origins.len() - 1);
            origins.len() - 1
        })
    };

    let mut init = BTreeSet::new();
    for (cube, dst) in &out_of[aut.initial()] {
        if cube.consistent_with_bits(0) {
            let loc = BhaLocation {
                state: *dst,
                constraints: cube.positive_flows(),
            };
            init.insert(intern(loc, &mut origins, &mut queue));
        }
    }

    // (src, action index, dst)
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut seen = BTreeSet::new();
    while let Some(l) = queue.pop_front() {
        let q = origins[l].state;
        for (cube, dst) in &out_of[q] {
            let target = BhaLocation {
                state: *dst,
                constraints: cube.positive_flows(),
            };
            let m = intern(target, &mut origins, &mut queue);
            for (k, (_, bits)) in alphabet.iter().enumerate() {
                if cube.consistent_with_bits(*bits) && seen.insert((l, k, m)) {
                    edges.push((l, k, m));
                }
            }
        }
    }

    let mut variants: BTreeMap<usize, usize> = BTreeMap::new();
    for o in &origins {
        *variants.entry(o.state).or_default() += 1;
    }
    let mut counter: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ha = HybridAutomaton::new(vars.iter().cloned(), alphabet.iter().map(|(a, _)| a.clone()));
    for o in &origins {
        let base = aut.name(o.state);
        let name = if variants[&o.state] > 1 {
            let k = counter.entry(o.state).or_default();
            *k += 1;
            format!("{base}_{k}")
        } else {
            base.to_string()
        };
        ha.add_location(&name, o.constraints.iter().cloned())?;
    }
    for (src, k, dst) in edges {
        ha.add_edge(src, alphabet[k].0.clone(), dst, [])?;
    }
    for l in init {
        ha.add_init(l)?;
    }
    let mut bha = BuchiHybridAutomaton::new(ha);
    for (l, o) in origins.iter().enumerate() {
        if aut.is_final(o.state) {
            bha.add_final(l)?;
        }
    }
    Ok((bha, origins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buchi::{ltl_to_buchi, normalize_labels, BoolExpr, Literal, Prop};
    use crate::discrete::{gamma, make_encoding};
    use crate::formula::{parse_hyltl, Action, Declarations};

    fn vars() -> BTreeSet<String> {
        ["x".to_string()].into()
    }

    #[test]
    fn universal_automaton_gives_one_location() {
        let enc = make_encoding(["on", "off"]).unwrap();
        let h = build_bha(&BuchiAutomaton::universal(), &enc, &vars()).unwrap();
        assert_eq!(h.num_locations(), 1);
        assert!(h.dynamics(0).is_empty());
        assert_eq!(h.edges().len(), 3);
        assert!(h.edges().iter().all(|e| e.src == 0 && e.dst == 0 && e.reset.is_empty()));
        assert!(h.init().contains(&0) && h.is_final(0));
    }

    #[test]
    fn rejects_unnormalized_labels() {
        let enc = make_encoding(["a"]).unwrap();
        let mut a = BuchiAutomaton::new(1, 0).unwrap();
        let f = Prop::Flow(FlowConstraint::parse("x >= 1", None).unwrap());
        a.add_transition(0, BoolExpr::Lit(Literal::neg(f)), 0).unwrap();
        assert_eq!(build_bha(&a, &enc, &vars()), Err(HybridError::NotNormalized));
    }

    #[test]
    fn thermostat_safety() {
        let decl = Declarations::new(["x"], ["on", "off"]);
        let phi = parse_hyltl("F({x >= 21} & X on)", &decl).unwrap();
        let enc = make_encoding(["on", "off"]).unwrap();
        let ba = ltl_to_buchi(&gamma(&phi, &enc).unwrap());
        let ba = normalize_labels(&ba, true, Some(&enc)).unwrap();
        let (h, origins) = build_bha_with_origins(&ba, &enc, &vars()).unwrap();
        assert_eq!(h.num_locations(), 3);
        let hot = FlowConstraint::parse("x >= 21", None).unwrap();
        let with_hot: Vec<usize> = (0..3).filter(|&l| h.dynamics(l).contains(&hot)).collect();
        assert_eq!(with_hot.len(), 1);
        assert!(h.init().contains(&with_hot[0]));
        assert_eq!(h.init().len(), 2);
        assert_eq!(h.finals().len(), 2);
        for (l, o) in origins.iter().enumerate() {
            assert_eq!(h.dynamics(l), &o.constraints);
            assert_eq!(h.is_final(l), ba.is_final(o.state));
        }
        // Leaving the x >= 21 location on `on` reaches a location with a self-loop on every action.
        let on = Action::new("on");
        let next: Vec<_> = h
            .edges()
            .iter()
            .filter(|e| e.src == with_hot[0] && e.action == on && e.dst != with_hot[0])
            .map(|e| e.dst)
            .collect();
        assert!(next.iter().any(|&d| {
            enc.alphabet()
                .iter()
                .all(|a| h.edge_index(d, a, d).is_some())
        }));
    }
}
