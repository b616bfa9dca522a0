//! A process calculus with handshake communication and truly non-blocking
//! broadcast, together with the analyses that make liveness claims about it
//! honest: derivation-level concurrency, justness-aware completeness of
//! runs, and bounded linear-time model checking on lasso paths.
//!
//! Start with [`parse_spec`], explore with [`lts::reachable`], and check
//! properties with [`analysis::check`]. The guide chapters under `book/`
//! are compiled as doc-tests, so every snippet in them runs.

pub mod abstraction;
pub mod analysis;
pub mod conc;
pub mod corpus;
pub mod justness;
pub mod ltl;
pub mod lts;
pub mod parse;
pub mod paths;
pub mod pretty;
pub mod random;
pub mod sos;
pub mod syntax;

pub use abstraction::{
    abstract_of, abstract_transitions_of, enabled_during, enabled_in_process, AbstractTransition,
};
pub use analysis::{
    bisimilar, check, enumerate_complete, enumerate_finite_paths, enumerate_lassos,
    visit_finite_paths, AnalysisError, Bounds, Verdict,
};
pub use conc::{concurrent, concurrent_oneway};
pub use justness::{
    complete, just_def1, just_s_via_lifts, just_thm3_u, min_blocked_sets, non_blocking,
    nu_enabled, progressing, y_just_def1, JustnessMethod, JustnessVerdict, YSet,
};
pub use ltl::{eval_s, eval_u, parse_fairness, parse_ltl, FairnessSpec, LtlError, LtlFormula};
pub use lts::{reachable, reachable_from, Edge, LtsGraph, StateBoundExceeded};
pub use parse::{parse_process, parse_spec, ParseError};
pub use paths::{
    decompose_par_s, decompose_par_u, decompose_rel, decompose_res, hat, lifts, lifts_finite,
    parse_lasso_literal, FinitePath, Lasso, LassoLiteralError, Path, SState, UState,
};
pub use random::{plug, Generator};
pub use sos::{admits, can_receive, step, step_discard, step_original, sync_label};
pub use sos::{Derivation, Semantics};
pub use syntax::{Action, BroadcastKind, Env, Label, Name, Process, Relabelling, Spec};
