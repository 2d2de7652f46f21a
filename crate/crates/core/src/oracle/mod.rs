//! Executable semantics backing the property tests.

pub mod bha;
pub mod emptiness;
pub mod eval;
pub mod trace;

pub use bha::{bha_accepts, bha_accepts_ignoring_resets, BhaError, CompiledBha};
pub use emptiness::{buchi_accepts, buchi_empty, buchi_empty_scc, nested_dfs, CompiledBuchi};
pub use eval::{eval_hyltl, eval_ltl_lasso, EvalError, HyLtlEvaluator, LtlEvaluator};
pub use trace::{restrict, AbstractLassoTrace, AbstractTrajectory, Atom, Step, TraceError, Universe};
