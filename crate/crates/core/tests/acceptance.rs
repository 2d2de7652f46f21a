//! Acceptance suite. Prints one line per criterion and fails if any does.

mod common;

use std::time::{Duration, Instant};

use hyltl::buchi::Prop;
use hyltl::check::{bha_equivalence, formula_universe, split_translation, discretization, upward_closure, Report};
use hyltl::discrete::{gamma, make_encoding};
use hyltl::gen::{
    random_buchi, random_hyltl, random_nnf, random_positive, random_positive_ltl, rng, Alphabet, TraceBounds,
    TraceSpace, WordSpace,
};
use hyltl::hybrid::{compose, export_monitor, parse_monitor};
use hyltl::oracle::{buchi_empty, buchi_empty_scc, Universe};
use hyltl::pipeline::translate;
use hyltl::to_nnf;

use common::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn from_report(r: &Report) -> Outcome {
    outcome(r.passed(), r.to_string())
}

fn run(n: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let in_time = limit.is_none_or(|l| took < l);
    let ok = o.passed && in_time;
    let limit = limit.map(|l| format!(" < {}s", l.as_secs_f64())).unwrap_or_default();
    println!(
        "criterion {n} {}: {name}: {} [{:.2}s{limit}]",
        if ok { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64()
    );
    ok
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn gamma_golden() -> Outcome {
    let enc = make_encoding(["on", "off"]).unwrap();
    let g = gamma(&to_nnf(&not_hyb()), &enc).unwrap().to_string();
    let want = "!b0 & !b1 & (true U (\"x >= 21\" & X(b0 & !b1)))";
    outcome(g == want, g)
}

fn safety_bha() -> Outcome {
    let t = translate(&not_hyb(), &["on", "off"], &vars(), None).unwrap();
    let n = t.bha.num_locations();
    let u = formula_universe(&t.nnf).unwrap();
    let space = TraceSpace::new(u, make_encoding(["on", "off"]).unwrap().user_actions(), TraceBounds::default());
    let mut traces = Vec::new();
    space.for_each(false, |a| traces.push(a.clone()));
    let r = bha_equivalence(&t.nnf, &t.bha, &traces, false, 0).unwrap();
    outcome(n == 3 && r.passed(), format!("{n} locations; {r}"))
}

fn liveness_bha() -> Outcome {
    let t = translate(&not_liv(), &["on", "off"], &vars(), None).unwrap();
    let n = t.bha.num_locations();
    let u = formula_universe(&t.nnf).unwrap();
    let space = TraceSpace::new(u, make_encoding(["on", "off"]).unwrap().user_actions(), TraceBounds::default());
    let mut r = rng(3);
    let traces: Vec<_> = (0..1000).map(|_| space.sample(&mut r)).collect();
    let k = t.nnf.negated_flow_atoms().len();
    let rep = bha_equivalence(&t.nnf, &t.bha, &traces, t.used_pi, k).unwrap();
    outcome(
        t.used_pi && n <= 8 && rep.passed() && rep.exhausted == 0,
        format!("{n} locations (target 5); {rep}"),
    )
}

fn discretization_suite() -> Outcome {
    let mut r = rng(4);
    let mut total = Report::default();
    for _ in 0..500 {
        let a = Alphabet::random(&mut r, 3, 2);
        let phi = random_hyltl(&mut r, 4, &a);
        let enc = make_encoding(a.actions.iter().map(|a| a.name())).unwrap();
        let space = TraceSpace::new(formula_universe(&phi).unwrap(), a.actions.clone(), TraceBounds::default());
        total.absorb(discretization(&phi, &enc, &space, true).unwrap());
    }
    from_report(&total)
}

fn split_suite() -> Outcome {
    let mut r = rng(5);
    let mut total = Report::default();
    for _ in 0..200 {
        let a = Alphabet::random(&mut r, 3, 2);
        let phi = random_nnf(&mut r, 3, &a);
        let k = phi.negated_flow_atoms().len();
        let space = TraceSpace::new(formula_universe(&phi).unwrap(), a.actions.clone(), TraceBounds::default());
        let traces: Vec<_> = (0..300).map(|_| space.sample(&mut r)).collect();
        total.absorb(split_translation(&phi, &traces, k).unwrap());
    }
    from_report(&total)
}

fn upward_closure_suite() -> Outcome {
    let mut r = rng(6);
    let mut total = Report::default();
    for _ in 0..200 {
        let a = Alphabet::random(&mut r, 2, 2);
        let g = random_positive_ltl(&mut r, 3, &a.flows, 2);
        let u = std::sync::Arc::new(Universe::new(a.flows.clone()).unwrap());
        total.absorb(upward_closure(&g, &WordSpace::all_bits(u, 2, 1, 2)).unwrap());
    }
    from_report(&total)
}

fn automaton_suite() -> Outcome {
    let mut r = rng(7);
    let mut total = Report::default();
    let mut largest = 0;
    for _ in 0..100 {
        let a = Alphabet::random(&mut r, 3, 2);
        let phi = random_positive(&mut r, 3, &a);
        let names: Vec<&str> = a.actions.iter().map(|a| a.name()).collect();
        let vars = a.flows.iter().flat_map(|f| f.variables()).map(|v| v.name).collect();
        let t = translate(&phi, &names, &vars, None).unwrap();
        largest = largest.max(t.bha.num_locations());
        let space = TraceSpace::new(formula_universe(&phi).unwrap(), a.actions.clone(), TraceBounds::default());
        let mut traces = Vec::new();
        space.for_each(true, |a| traces.push(a.clone()));
        total.absorb(bha_equivalence(&phi, &t.bha, &traces, false, 0).unwrap());
    }
    outcome(total.passed(), format!("{total}; largest automaton {largest} locations"))
}

fn emptiness_suite() -> Outcome {
    let mut r = rng(8);
    let props = [Prop::Bit(0), Prop::Bit(1)];
    let mut agree = 0;
    let mut nonempty = 0;
    for _ in 0..200 {
        let a = random_buchi(&mut r, 8, &props);
        let (x, y) = (buchi_empty(&a), buchi_empty_scc(&a));
        agree += usize::from(x == y);
        nonempty += usize::from(!x);
    }
    outcome(agree == 200, format!("{agree}/200 agree, {nonempty} nonempty"))
}

fn monitor_golden() -> Outcome {
    let t = translate(&not_hyb(), &["on", "off"], &vars(), None).unwrap();
    let product = compose(&thermostat(), &t.bha).unwrap();
    let text = export_monitor(&product, "product").unwrap();
    let golden = include_str!("golden/thermostat_product.monitor");
    let back = parse_monitor(golden).unwrap();
    let fixture = thermostat_product();
    outcome(
        text == golden && back == fixture && product == fixture,
        format!("{} locations", product.num_locations()),
    )
}

#[test]
fn acceptance() {
    let results = [
        run(1, "discretized safety formula", secs(1), gamma_golden),
        run(2, "safety automaton", secs(30), safety_bha),
        run(3, "liveness automaton", secs(60), liveness_bha),
        run(4, "discretization preserves truth", secs(120), discretization_suite),
        run(5, "split-action translation", secs(120), split_suite),
        run(6, "upward closure in flow atoms", None, upward_closure_suite),
        run(7, "automaton equals formula", secs(180), automaton_suite),
        run(8, "emptiness cross-check", None, emptiness_suite),
        run(9, "monitor export of the thermostat product", None, monitor_golden),
    ];
    let failed: Vec<usize> = (1..=9).filter(|&i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
