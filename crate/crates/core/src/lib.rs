//! A unification engine for second-order problems in the simply typed
//! lambda calculus, restricted to symbols of order at most two and
//! equations of base type.
//!
//! The engine decides linear problems (each second-order variable occurs at
//! most once) by flattening them into superficial form and running a
//! measure-instrumented variant of Huet's search restricted so that only
//! second-order heads branch. On top of that, [`general::general_solve`]
//! handles arbitrary problems by renaming occurrences apart, solving the
//! linear problem and reconciling the copies — returning either a finite
//! complete set of unifiers or an explicit no-information verdict. The
//! [`oracle`] module provides deliberately naive reference implementations
//! (a textbook first-order unifier, a brute-force matcher enumerator, a
//! solution verifier and a seeded problem generator) used to validate the
//! engine.

pub mod fresh;
pub mod general;
pub mod oracle;
pub mod problem;
pub mod report;
pub mod solver;
pub mod subst;
pub mod superficialize;
pub mod syntax;
pub mod term;

pub use fresh::FreshNames;
pub use general::{general_solve, linearize, reconcile, CopyMap, GeneralOutcome, GeneralResult};
pub use problem::{
    classify_term, is_linear, is_superficial, measure, validate_problem, Equation, Head, Measure,
    Problem, ValidateError,
};
pub use solver::{
    canonical_instance, finalize_node, solve_linear, FailureCause, FinalizedResult,
    LinearSolution, Outcome, SearchNode, SearchTree, StepLabel, SuccessLeaf,
};
pub use subst::Substitution;
pub use superficialize::{superficialize, FlatteningTrace};
pub use term::{beta_eta_equal, Name, Term, TermError, Type};
