//! HOA view of a Büchi hybrid automaton's discrete skeleton.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::BuchiHybridAutomaton;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// State 0 is a fresh initial state; location `l` becomes state `l + 1`.
/// Atomic propositions are one per action followed by one per flow
/// constraint. Entering a location reads its flow constraints together with
/// the action taken, or with no action at all from state 0.
pub fn export_bha_hoa(h: &BuchiHybridAutomaton, name: Option<&str>) -> String {
    let actions: Vec<_> = h.actions().iter().collect();
    let flows: Vec<_> = h.flow_constraints().into_iter().collect();
    let flow_ap: BTreeMap<_, usize> = flows
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), actions.len() + i))
        .collect();
    let entering = |l: usize| -> Vec<String> { h.dynamics(l).iter().map(|c| flow_ap[c].to_string()).collect() };

    let mut s = String::from("HOA: v1\n");
    if let Some(name) = name {
        let _ = writeln!(s, "name: {}", quote(name));
    }
    let _ = writeln!(s, "States: {}", h.num_locations() + 1);
    s.push_str("Start: 0\n");
    let _ = write!(s, "AP: {}", actions.len() + flows.len());
    for a in &actions {
        let _ = write!(s, " {}", quote(a.name()));
    }
    for c in &flows {
        let _ = write!(s, " {}", quote(c.as_str()));
    }
    s.push_str("\nacc-name: Buchi\nAcceptance: 1 Inf(0)\n");
    s.push_str("properties: trans-labels explicit-labels state-acc\n--BODY--\n");

    let label = |parts: Vec<String>| if parts.is_empty() { "t".to_string() } else { parts.join("&") };
    s.push_str("State: 0\n");
    for &l in h.init() {
        let mut parts: Vec<String> = (0..actions.len()).map(|i| format!("!{i}")).collect();
        parts.extend(entering(l));
        let _ = writeln!(s, "[{}] {}", label(parts), l + 1);
    }
    let succ = h.successors();
    for l in 0..h.num_locations() {
        let _ = write!(s, "State: {} {}", l + 1, quote(h.name(l)));
        if h.is_final(l) {
            s.push_str(" {0}");
        }
        s.push('\n');
        for e in &succ[l] {
            let a = actions.iter().position(|x| **x == e.action).expect("declared action");
            let mut parts: Vec<String> = (0..actions.len())
                .map(|i| if i == a { i.to_string() } else { format!("!{i}") })
                .collect();
            parts.extend(entering(e.dst));
            let _ = writeln!(s, "[{}] {}", label(parts), e.dst + 1);
        }
    }
    s.push_str("--END--\n");
    s
}
