//! Translation of NNF HyLTL into the positive-flow fragment.
//!
//! Negated flow constraints cannot be enforced by location dynamics. The
//! translation introduces the split action `T`: a trajectory violating `f`
//! somewhere is cut with `T` around an instant where the dual `f̄` holds, and
//! the translated formula talks about those pieces instead.

use thiserror::Error;

use crate::formula::HyLtlFormula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PiError {
    #[error("input formula is not in negation normal form")]
    NotNnf,
    #[error("input formula already mentions the split action T")]
    MentionsSplit,
}

use HyLtlFormula as H;

fn t() -> HyLtlFormula {
    H::split()
}

/// Applies the rewrite rules verbatim; no simplification of the result.
pub fn pi(phi: &HyLtlFormula) -> Result<HyLtlFormula, PiError> {
    if !phi.is_nnf() {
        return Err(PiError::NotNnf);
    }
    if phi.actions().iter().any(|a| a.is_split()) {
        return Err(PiError::MentionsSplit);
    }
    Ok(translate(phi))
}

fn translate(phi: &HyLtlFormula) -> HyLtlFormula {
    match phi {
        H::True | H::False | H::Action(_) => phi.clone(),
        // f ∧ X((T ∧ f) U ¬T)
        H::Flow(_) => phi
            .clone()
            .and(t().and(phi.clone()).until(t().not()).next()),
        H::Not(inner) => match &**inner {
            H::Action(_) => phi.clone(),
            // f̄ ∨ X(T U (T ∧ f̄))
            H::Flow(f) => {
                let dual = H::Flow(f.dual());
                dual.clone().or(t().until(t().and(dual)).next())
            }
            _ => unreachable!("checked NNF"),
        },
        H::And(a, b) => translate(a).and(translate(b)),
        H::Or(a, b) => translate(a).or(translate(b)),
        // (T ∨ π(φ)) U (¬T ∧ π(ψ))
        H::Until(a, b) => t().or(translate(a)).until(t().not().and(translate(b))),
        // (¬T ∧ π(φ)) R (T ∨ π(ψ))
        H::Release(a, b) => t().not().and(translate(a)).release(t().or(translate(b))),
        // X(T U (¬T ∧ π(φ)))
        H::Next(a) => t().until(t().not().and(translate(a))).next(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::FlowConstraint;
    use crate::formula::{parse_hyltl, Declarations};
    use proptest::prelude::*;

    fn flow(s: &str) -> HyLtlFormula {
        H::Flow(FlowConstraint::parse(s, None).unwrap())
    }

    fn parse(s: &str) -> HyLtlFormula {
        parse_hyltl(s, &Declarations::new(["x"], ["on", "off"])).unwrap()
    }

    #[test]
    fn negated_flow_rule() {
        let out = pi(&flow("x >= 18").not()).unwrap();
        let dual = flow("x < 18");
        let expected = dual.clone().or(t().until(t().and(dual)).next());
        assert_eq!(out, expected);
        assert_eq!(out.to_string(), "{x < 18} | X(T U (T & {x < 18}))");
    }

    #[test]
    fn positive_flow_rule() {
        let out = pi(&flow("x >= 18")).unwrap();
        assert_eq!(out.to_string(), "{x >= 18} & X((T & {x >= 18}) U !T)");
    }

    #[test]
    fn actions_are_untouched() {
        assert_eq!(pi(&H::action("on")).unwrap(), H::action("on"));
        let lit = H::action("on").not();
        assert_eq!(pi(&lit).unwrap(), lit);
        let pure = parse("on & !off | off");
        assert_eq!(pi(&pure).unwrap(), pure);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(pi(&parse("!(on & off)")), Err(PiError::NotNnf));
        assert_eq!(pi(&H::split().or(H::True)), Err(PiError::MentionsSplit));
    }

    #[test]
    fn negated_liveness_matches_displayed_translation() {
        let neg_liv = parse("F(!{x >= 18} & X G !on)").to_nnf();
        let out = pi(&neg_liv).unwrap();
        assert_eq!(out.is_positive(), Ok(true));

        // ⊤ U (¬T ∧ (x<18 ∨ X(T U (T ∧ x<18))) ∧ X(T U (¬T ∧ ⊥ R (T ∨ ¬on))))
        let below = flow("x < 18");
        let witness = below.clone().or(t().until(t().and(below)).next());
        let stays_off = H::False.release(t().or(H::action("on").not()));
        let displayed = H::True.until(
            t().not()
                .and(witness.and(t().until(t().not().and(stays_off)).next())),
        );
        // The displayed form drops `T ∨ ⊤` and `¬T ∧ ⊥`; everything else is verbatim.
        assert_eq!(out.fold_constants(), displayed);
        assert_ne!(out, displayed);
    }

    fn arb_nnf() -> impl Strategy<Value = HyLtlFormula> {
        let leaf = prop_oneof![
            Just(H::True),
            Just(H::False),
            prop::sample::select(vec!["x >= 21", "x < 3"]).prop_map(flow),
            prop::sample::select(vec!["x >= 21", "x < 3"]).prop_map(|s| flow(s).not()),
            prop::sample::select(vec!["on", "off"]).prop_map(H::action),
            prop::sample::select(vec!["on", "off"]).prop_map(|a| H::action(a).not()),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(HyLtlFormula::next),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.until(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.release(b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn output_is_positive(f in arb_nnf()) {
            let out = pi(&f).unwrap();
            prop_assert_eq!(out.is_positive(), Ok(true));
        }
    }
}
