#![allow(dead_code)]

use std::collections::BTreeSet;

use hyltl::hybrid::{BuchiHybridAutomaton, HybridAutomaton};
use hyltl::{parse_hyltl, Action, Declarations, FlowConstraint, HyLtlFormula, JumpConstraint};

pub fn flow(s: &str) -> FlowConstraint {
    FlowConstraint::parse(s, None).unwrap()
}

pub fn jump(s: &str) -> JumpConstraint {
    JumpConstraint::parse(s, None).unwrap()
}

pub fn vars() -> BTreeSet<String> {
    ["x".to_string()].into()
}

pub fn thermo(s: &str) -> HyLtlFormula {
    parse_hyltl(s, &Declarations::new(["x"], ["on", "off"])).unwrap()
}

/// `F({x >= 21} & X on)` negated twice.
pub fn not_hyb() -> HyLtlFormula {
    thermo("!!F({x >= 21} & X on)")
}

pub fn not_liv() -> HyLtlFormula {
    thermo("!G({x >= 18} | X F on)")
}

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

/// The thermostat synchronized with the safety property automaton, worked
/// out by hand. Names are `system__property`.
pub fn thermostat_product() -> BuchiHybridAutomaton {
    let t = Action::split();
    let on = Action::new("on");
    let off = Action::new("off");
    let mut h = HybridAutomaton::new(["x"], [t.clone(), off.clone(), on.clone()]);
    let cool = [flow("x >= 18"), flow("x' = -0.1 * x")];
    let heat = [flow("x <= 22"), flow("x' = 5 - 0.1 * x")];
    let hot = flow("x >= 21");
    let off1 = h.add_location("heat_off__q1", cool.clone()).unwrap();
    let off2 = h
        .add_location("heat_off__q2", cool.iter().cloned().chain([hot.clone()]))
        .unwrap();
    let on1 = h.add_location("heat_on__q1", heat.clone()).unwrap();
    let on2 = h
        .add_location("heat_on__q2", heat.iter().cloned().chain([hot]))
        .unwrap();
    let on3 = h.add_location("heat_on__q3", heat).unwrap();
    let off3 = h.add_location("heat_off__q3", cool).unwrap();
    let keep = || [jump("x = ~x")];
    let switch_on = || [jump("x = ~x"), jump("~x <= 19")];
    let switch_off = || [jump("x = ~x"), jump("~x >= 21")];
    for (src, a, dst) in [
        (off1, &on, on1),
        (off1, &t, off1),
        (off1, &on, on2),
        (off1, &t, off2),
        (off2, &on, on3),
        (on1, &off, off1),
        (on1, &t, on1),
        (on1, &off, off2),
        (on1, &t, on2),
        (on3, &off, off3),
        (on3, &t, on3),
        (off3, &on, on3),
        (off3, &t, off3),
    ] {
        let reset: Vec<_> = if *a == t {
            keep().to_vec()
        } else if *a == on {
            switch_on().to_vec()
        } else {
            switch_off().to_vec()
        };
        h.add_edge(src, a.clone(), dst, reset).unwrap();
    }
    h.add_init(off1).unwrap();
    h.add_init(off2).unwrap();
    let mut b = BuchiHybridAutomaton::new(h);
    for l in [off2, on2, on3, off3] {
        b.add_final(l).unwrap();
    }
    b
}
