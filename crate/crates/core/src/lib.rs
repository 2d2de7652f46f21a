//! HyLTL to Büchi hybrid automaton compiler.
//!
//! Pipeline: parse, negation normal form, the split-action translation into
//! the positive fragment, bit-encoded discretization to LTL, tableau
//! translation to a Büchi automaton and construction of the Büchi hybrid
//! automaton. The [`oracle`] module holds executable semantics used to
//! validate each stage.

mod syntax;

pub mod buchi;
pub mod check;
pub mod constraint;
pub mod discrete;
pub mod formula;
pub mod gen;
pub mod hybrid;
pub mod oracle;
pub mod pi;
pub mod pipeline;

pub use syntax::ParseError;

pub use constraint::{dual, FlowConstraint, JumpConstraint, Relation};
pub use formula::{is_positive, parse_hyltl, to_nnf, Action, Declarations, HyLtlFormula};
pub use pi::pi;
