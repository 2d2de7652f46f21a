//! Synchronous product of a system automaton and a property automaton.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{BuchiHybridAutomaton, HybridAutomaton, HybridError};
use crate::constraint::JumpConstraint;
use crate::formula::Action;

fn join<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    items.into_iter().collect::<Vec<_>>().join(", ")
}

/// `sys` extended with a stutter self-loop on every location for each of
/// `extra`'s actions it lacks. The loops keep every variable unchanged.
pub fn ground_system(
    sys: &HybridAutomaton,
    extra: &BTreeSet<Action>,
) -> Result<HybridAutomaton, HybridError> {
    let added: Vec<Action> = extra.difference(sys.actions()).cloned().collect();
    let actions = sys.actions().iter().chain(&added).cloned();
    let mut out = HybridAutomaton::new(sys.vars().iter().cloned(), actions);
    for l in 0..sys.num_locations() {
        out.add_location(sys.name(l), sys.dynamics(l).iter().cloned())?;
    }
    for e in sys.edges() {
        out.add_edge(e.src, e.action.clone(), e.dst, e.reset.iter().cloned())?;
    }
    let keep: Vec<JumpConstraint> = sys.vars().iter().map(|v| JumpConstraint::keep(v)).collect();
    for l in 0..sys.num_locations() {
        for a in &added {
            out.add_edge(l, a.clone(), l, keep.iter().cloned())?;
        }
    }
    for &l in sys.init() {
        out.add_init(l)?;
    }
    Ok(out)
}

/// Product of `sys` (every location accepting) and `prop`, restricted to
/// the part reachable from `Init₁ × Init₂`.
///
/// Both sides must declare the same variables and the same user actions.
/// The property's reserved actions (the split action and padding) are
/// grafted onto `sys` with [`ground_system`] first.
pub fn compose(
    sys: &HybridAutomaton,
    prop: &BuchiHybridAutomaton,
) -> Result<BuchiHybridAutomaton, HybridError> {
    if sys.vars() != prop.vars() {
        return Err(HybridError::VariableMismatch(
            join(sys.vars().iter().map(String::as_str)),
            join(prop.vars().iter().map(String::as_str)),
        ));
    }
    let user = |a: &&Action| !a.is_reserved();
    let sys_user: BTreeSet<&Action> = sys.actions().iter().filter(user).collect();
    let prop_user: BTreeSet<&Action> = prop.actions().iter().filter(user).collect();
    if let Some(a) = sys_user.symmetric_difference(&prop_user).next() {
        return Err(HybridError::ActionMismatch(a.name().to_string()));
    }
    let reserved: BTreeSet<Action> = prop.actions().iter().filter(|a| a.is_reserved()).cloned().collect();
    let ground = ground_system(sys, &reserved)?;

    let mut by_action_1: BTreeMap<(usize, &Action), Vec<usize>> = BTreeMap::new();
    for (i, e) in ground.edges().iter().enumerate() {
        by_action_1.entry((e.src, &e.action)).or_default().push(i);
    }
    let succ_2 = prop.successors();

    let actions = ground.actions().union(prop.actions()).cloned();
    let mut out = HybridAutomaton::new(sys.vars().iter().cloned(), actions);
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pairs = Vec::new();
    let mut queue = VecDeque::new();
    let mut visit = |p: (usize, usize),
                     out: &mut HybridAutomaton,
                     pairs: &mut Vec<(usize, usize)>,
                     queue: &mut VecDeque<usize>|
     -> Result<usize, HybridError> {
        if let Some(&id) = index.get(&p) {
            return Ok(id);
        }
        let name = format!("{}__{}", ground.name(p.0), prop.name(p.1));
        let dynamics = ground.dynamics(p.0).union(prop.dynamics(p.1)).cloned();
        let id = out.add_location(&name, dynamics)?;
        index.insert(p, id);
        pairs.push(p);
        queue.push_back(id);
        Ok(id)
    };

    for &i1 in ground.init() {
        for &i2 in prop.init() {
            let id = visit((i1, i2), &mut out, &mut pairs, &mut queue)?;
            out.add_init(id)?;
        }
    }
    while let Some(id) = queue.pop_front() {
        let (l1, l2) = pairs[id];
        for e2 in &succ_2[l2] {
            let Some(list) = by_action_1.get(&(l1, &e2.action)) else {
                continue;
            };
            for &i in list {
                let e1 = &ground.edges()[i];
                let dst = visit((e1.dst, e2.dst), &mut out, &mut pairs, &mut queue)?;
                let reset = e1.reset.union(&e2.reset).cloned();
                out.add_edge(id, e2.action.clone(), dst, reset)?;
            }
        }
    }

    let mut bha = BuchiHybridAutomaton::new(out);
    for (id, &(_, l2)) in pairs.iter().enumerate() {
        if prop.is_final(l2) {
            bha.add_final(id)?;
        }
    }
    Ok(bha)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn universal(actions: &[Action]) -> BuchiHybridAutomaton {
        let mut h = HybridAutomaton::new(["x"], actions.iter().cloned());
        let l = h.add_location("u", []).unwrap();
        for a in actions {
            h.add_edge(l, a.clone(), l, []).unwrap();
        }
        h.add_init(l).unwrap();
        BuchiHybridAutomaton::all_final(h)
    }

    #[test]
    fn unit_of_composition() {
        let sys = thermostat();
        let acts: Vec<Action> = sys.actions().iter().cloned().collect();
        let p = compose(&sys, &universal(&acts)).unwrap();
        assert_eq!(p.num_locations(), 2);
        assert_eq!(p.edges().len(), 2);
        for l in 0..2 {
            let orig = sys.location(p.name(l).strip_suffix("__u").unwrap()).unwrap();
            assert_eq!(p.dynamics(l), sys.dynamics(orig));
        }
        assert_eq!(p.finals().len(), 2);
        assert_eq!(p.init().len(), 1);
    }

    #[test]
    fn split_action_is_grafted() {
        let sys = thermostat();
        let mut acts: Vec<Action> = sys.actions().iter().cloned().collect();
        acts.push(Action::split());
        let p = compose(&sys, &universal(&acts)).unwrap();
        assert_eq!(p.edges().len(), 4);
        let loops: Vec<_> = p.edges().iter().filter(|e| e.action.is_split()).collect();
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|e| e.src == e.dst && e.reset == [jump("x = ~x")].into()));
    }

    #[test]
    fn mismatches() {
        let sys = thermostat();
        let mut other = HybridAutomaton::new(["y"], sys.actions().iter().cloned());
        let l = other.add_location("l", []).unwrap();
        other.add_init(l).unwrap();
        assert!(matches!(
            compose(&sys, &BuchiHybridAutomaton::all_final(other)),
            Err(HybridError::VariableMismatch(..))
        ));
        assert_eq!(
            compose(&sys, &universal(&[Action::new("on")])),
            Err(HybridError::ActionMismatch("off".into()))
        );
    }
}
