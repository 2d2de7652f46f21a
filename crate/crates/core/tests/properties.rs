mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use hyltl::buchi::{ltl_to_buchi, normalize_labels};
use hyltl::check::{formula_universe, ltl_buchi, splits};
use hyltl::discrete::{gamma, make_encoding, LtlFormula};
use hyltl::gen::{
    action_pool, flow_pool, random_hyltl, random_nnf, random_positive, rng, Alphabet, TraceBounds, TraceSpace,
    WordSpace,
};
use hyltl::hybrid::{compose, ground_system, BuchiHybridAutomaton};
use hyltl::oracle::{
    bha_accepts, bha_accepts_ignoring_resets, buchi_empty, AbstractLassoTrace, HyLtlEvaluator, Universe,
};
use hyltl::pipeline::translate;
use hyltl::{parse_hyltl, pi, to_nnf, Action, Declarations, FlowConstraint, HyLtlFormula, Relation};

use common::*;

fn alphabet(seed: u64) -> (hyltl::gen::Rng64, Alphabet) {
    let mut r = rng(seed);
    let a = Alphabet::random(&mut r, 3, 2);
    (r, a)
}

fn reps(phi: &HyLtlFormula, actions: Vec<Action>) -> TraceSpace {
    TraceSpace::new(formula_universe(phi).unwrap(), actions, TraceBounds::default())
}

/// Boolean combination of action literals.
fn action_formula() -> impl Strategy<Value = HyLtlFormula> {
    let leaf = prop_oneof![
        Just(HyLtlFormula::Action(Action::new("on"))),
        Just(HyLtlFormula::Action(Action::new("off"))),
        Just(HyLtlFormula::True),
        Just(HyLtlFormula::False),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| HyLtlFormula::Not(Box::new(f))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| HyLtlFormula::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| HyLtlFormula::Or(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nnf_is_idempotent(seed in any::<u64>()) {
        let (mut r, a) = alphabet(seed);
        let phi = random_hyltl(&mut r, 4, &a);
        let n = to_nnf(&phi);
        prop_assert!(n.is_nnf());
        prop_assert_eq!(to_nnf(&n), n);
    }

    #[test]
    fn nnf_preserves_truth(seed in any::<u64>()) {
        let (mut r, a) = alphabet(seed);
        let phi = random_hyltl(&mut r, 3, &a);
        let n = to_nnf(&phi);
        let space = reps(&phi, a.actions.clone());
        let u = space.universe().clone();
        let (e, f) = (HyLtlEvaluator::new(&phi, &u).unwrap(), HyLtlEvaluator::new(&n, &u).unwrap());
        let mut bad = None;
        space.for_each(true, |t| {
            if bad.is_none() && e.eval(t) != f.eval(t) {
                bad = Some(t.to_string());
            }
        });
        prop_assert!(bad.is_none(), "{phi} vs {n} on {bad:?}");
    }

    #[test]
    fn dual_is_an_involution(i in 0usize..6, lhs in "[xy]'?", rhs in -100i32..100) {
        let f = FlowConstraint::parse(&format!("{lhs} {} {rhs}", Relation::ALL[i].symbol()), None).unwrap();
        prop_assert_ne!(f.dual(), f.clone());
        prop_assert_eq!(f.dual().dual(), f);
    }

    #[test]
    fn printing_parses_back(seed in any::<u64>()) {
        let (mut r, a) = alphabet(seed);
        let phi = random_hyltl(&mut r, 4, &a);
        prop_assert_eq!(parse_hyltl(&phi.to_string(), &Declarations::permissive()).unwrap(), phi);
    }

    #[test]
    fn pi_output_is_positive(seed in any::<u64>()) {
        let (mut r, a) = alphabet(seed);
        let phi = random_nnf(&mut r, 4, &a);
        prop_assert!(pi(&phi).unwrap().is_positive().unwrap());
    }

    #[test]
    fn pi_fixes_action_formulas(phi in action_formula()) {
        let n = to_nnf(&phi);
        prop_assert_eq!(pi(&n).unwrap(), n);
    }

    #[test]
    fn encoding_is_deterministic(mask in 1u32..16) {
        let names: Vec<String> = (0..4).filter(|i| mask >> i & 1 == 1).map(|i| format!("a{i}")).collect();
        let mut reversed = names.clone();
        reversed.reverse();
        prop_assert_eq!(make_encoding(&names).unwrap(), make_encoding(&names).unwrap());
        prop_assert_eq!(make_encoding(&names).unwrap(), make_encoding(&reversed).unwrap());
    }

    #[test]
    fn tableau_matches_lasso_semantics(seed in any::<u64>()) {
        let (mut r, a) = alphabet(seed);
        let mut flows = a.flows.clone();
        flows.truncate(1);
        let phi = random_hyltl(&mut r, 3, &Alphabet { flows, actions: a.actions.clone() });
        let enc = make_encoding(a.actions.iter().map(|a| a.name())).unwrap();
        let g = gamma(&phi, &enc).unwrap();
        let space = WordSpace::all_bits(Arc::new(Universe::new(g.flow_atoms()).unwrap()), enc.n(), 1, 2);
        let rep = ltl_buchi(&g, &ltl_to_buchi(&g), &space).unwrap();
        prop_assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn normalization_keeps_positive_languages(seed in any::<u64>()) {
        let (mut r, a) = alphabet(seed);
        let mut flows = a.flows.clone();
        flows.truncate(2);
        let phi = random_positive(&mut r, 3, &Alphabet { flows, actions: a.actions.clone() });
        let enc = make_encoding(a.actions.iter().map(|a| a.name())).unwrap();
        let g = gamma(&phi, &enc).unwrap();
        let n = normalize_labels(&ltl_to_buchi(&g), true, Some(&enc)).unwrap();
        prop_assert!(n.is_normalized());
        let space = WordSpace::legal(Arc::new(Universe::new(g.flow_atoms()).unwrap()), &enc, 1, 2);
        let rep = ltl_buchi(&g, &n, &space).unwrap();
        prop_assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn built_automata_have_the_documented_shape(seed in any::<u64>()) {
        let (mut r, a) = alphabet(seed);
        let phi = random_positive(&mut r, 3, &a);
        let names: Vec<&str> = a.actions.iter().map(|a| a.name()).collect();
        let vars: BTreeSet<String> = ["x", "y"].map(String::from).into();
        let t = translate(&phi, &names, &vars, None).unwrap();
        prop_assert!(!t.used_pi);
        for l in 0..t.bha.num_locations() {
            let o = &t.origins[l];
            prop_assert_eq!(t.bha.dynamics(l), &o.constraints);
            prop_assert_eq!(t.bha.is_final(l), t.normalized.is_final(o.state));
        }
        prop_assert!(t.bha.edges().iter().all(|e| e.reset.is_empty()));
    }

    #[test]
    fn split_traces_restrict_back(seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = Arc::new(Universe::new(flow_pool()).unwrap());
        let space = TraceSpace::new(u, action_pool(), TraceBounds { stem: 2, cycle: 2, atoms: 3 });
        let alpha = space.sample(&mut r);
        let user: BTreeSet<Action> = action_pool().into_iter().collect();
        for beta in splits(&alpha, 2) {
            prop_assert_eq!(beta.restrict(&user).unwrap(), alpha.clone().normalized());
        }
    }
}

#[test]
fn constant_automata() {
    let t = ltl_to_buchi(&LtlFormula::True);
    let f = ltl_to_buchi(&LtlFormula::False);
    assert!(buchi_empty(&f));
    assert!(!buchi_empty(&t));
    let space = WordSpace::all_bits(Arc::new(Universe::new([]).unwrap()), 2, 1, 2);
    assert!(ltl_buchi(&LtlFormula::True, &t, &space).unwrap().passed());
    assert!(ltl_buchi(&LtlFormula::False, &f, &space).unwrap().passed());
}

#[test]
fn product_is_the_intersection() {
    let t = translate(&not_hyb(), &["on", "off"], &vars(), None).unwrap();
    let sys = thermostat();
    let product = compose(&sys, &t.bha).unwrap();
    let grounded = BuchiHybridAutomaton::all_final(ground_system(&sys, t.bha.actions()).unwrap());
    let mut all: BTreeSet<FlowConstraint> = BTreeSet::new();
    for l in 0..product.num_locations() {
        all.extend(product.dynamics(l).iter().cloned());
    }
    let u = Arc::new(Universe::new(all).unwrap());
    let mut actions = action_pool();
    actions.push(Action::split());
    let space = TraceSpace::new(u, actions, TraceBounds { stem: 2, cycle: 2, atoms: 1 });
    let mut r = rng(11);
    let mut accepted = 0;
    for _ in 0..3000 {
        let alpha: AbstractLassoTrace = space.sample(&mut r);
        let both = bha_accepts_ignoring_resets(&grounded, &alpha).unwrap() && bha_accepts(&t.bha, &alpha).unwrap();
        let p = bha_accepts_ignoring_resets(&product, &alpha).unwrap();
        assert_eq!(p, both, "{alpha}");
        accepted += usize::from(p);
    }
    assert!(product.num_locations() <= sys.num_locations() * t.bha.num_locations());
    assert!(accepted > 0);
}

#[test]
fn positive_formulas_stay_positive_through_the_pipeline() {
    let mut r = rng(12);
    for _ in 0..50 {
        let a = Alphabet::random(&mut r, 3, 2);
        let phi = random_positive(&mut r, 3, &a);
        let names: Vec<&str> = a.actions.iter().map(|a| a.name()).collect();
        let t = translate(&phi, &names, &["x", "y"].map(String::from).into(), None).unwrap();
        assert!(t.log.iter().any(|s| s.stage == "pi" && s.detail.starts_with("skipped")));
    }
}
