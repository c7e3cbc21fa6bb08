//! The machine-readable result schema shared by the CLI and the test
//! suites:
//!
//! ```json
//! { "status": "complete_set" | "pre_unifiers" | "no_information" | "fail",
//!   "solutions": [ { "F": "\\x1:i. g x1 d" } ],
//!   "residuals": [ [ "x = (#h1 : i -> i) c" ] ],
//!   "diagnostic": "...",
//!   "stats": { "nodes": 17, "successes": 2 } }
//! ```
//!
//! For `pre_unifiers`, `residuals[i]` lists the residual constraints of
//! `solutions[i]`; for other statuses it is empty. Output is byte-stable
//! for a fixed input: maps are ordered and rendering is deterministic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::general::{GeneralOutcome, GeneralResult};
use crate::problem::Equation;
use crate::solver::{FinalizedResult, LinearSolution};
use crate::subst::Substitution;
use crate::term::Name;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunReport {
    pub status: String,
    pub solutions: Vec<BTreeMap<String, String>>,
    pub residuals: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub stats: Stats,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Stats {
    pub nodes: usize,
    pub successes: usize,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn render_substitution(subst: &Substitution) -> BTreeMap<String, String> {
    subst
        .iter()
        .map(|(name, term)| (name.to_string(), term.to_string()))
        .collect()
}

fn render_residual(eqs: &[Equation]) -> Vec<String> {
    eqs.iter().map(|eq| eq.to_string()).collect()
}

/// Report for a linear solve: the finalized outcomes restricted to the
/// variables of interest (the problem's original declarations).
pub fn linear_report(
    solution: &LinearSolution,
    finalized: &[FinalizedResult],
    original_vars: &std::collections::BTreeSet<Name>,
) -> RunReport {
    let any_residual = finalized
        .iter()
        .any(|f| matches!(f, FinalizedResult::Residual(..)));
    let mut solutions = Vec::new();
    let mut residuals = Vec::new();
    for f in finalized {
        solutions.push(render_substitution(&f.unifier().restricted(original_vars)));
        residuals.push(render_residual(f.residual()));
    }
    if !any_residual {
        residuals.clear();
    }
    RunReport {
        status: if any_residual {
            "pre_unifiers".to_string()
        } else {
            "complete_set".to_string()
        },
        solutions,
        residuals,
        diagnostic: None,
        stats: Stats {
            nodes: solution.tree.node_count(),
            successes: solution.successes.len(),
        },
    }
}

/// Report for a general solve.
pub fn general_report(outcome: &GeneralOutcome) -> RunReport {
    let stats = Stats {
        nodes: outcome.tree.node_count(),
        successes: outcome.successes,
    };
    match &outcome.result {
        GeneralResult::CompleteSet(answers) => RunReport {
            status: "complete_set".to_string(),
            solutions: answers.iter().map(render_substitution).collect(),
            residuals: Vec::new(),
            diagnostic: None,
            stats,
        },
        GeneralResult::NoInformation(diag) => RunReport {
            status: "no_information".to_string(),
            solutions: Vec::new(),
            residuals: Vec::new(),
            diagnostic: Some(diag.to_string()),
            stats,
        },
    }
}

/// Report for a verification run.
pub fn verify_report(subst: &Substitution, verified: bool, failing: Option<&Equation>) -> RunReport {
    RunReport {
        status: if verified { "complete_set" } else { "fail" }.to_string(),
        solutions: if verified {
            vec![render_substitution(subst)]
        } else {
            Vec::new()
        },
        residuals: Vec::new(),
        diagnostic: failing.map(|eq| format!("equation not satisfied: {eq}")),
        stats: Stats {
            nodes: 0,
            successes: 0,
        },
    }
}
