//! The general procedure: rename every occurrence of a second-order
//! variable into a fresh copy, solve the resulting linear problem, then
//! keep the success nodes on which all copies of a variable agree on one
//! closed value. When some success node retains residual constraints, or a
//! copy is bound to a non-closed term, the procedure abstains with an
//! explicit no-information verdict; it never guesses.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fresh::FreshNames;
use crate::oracle::verify_solution;
use crate::problem::{validate_problem, Problem, ValidateError};
use crate::solver::{
    finalize_node, solve_linear_with, FinalizedResult, SearchTree, SolveError,
};
use crate::subst::Substitution;
use crate::term::{Name, Term};

/// Maps each original second-order variable to its per-occurrence copies,
/// in left-to-right occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CopyMap {
    pub copies: BTreeMap<Name, Vec<Name>>,
}

impl CopyMap {
    /// The original variable a copy belongs to, if any.
    pub fn original_of(&self, copy: &Name) -> Option<&Name> {
        self.copies
            .iter()
            .find(|(_, cs)| cs.contains(copy))
            .map(|(orig, _)| orig)
    }

    pub fn all_copies(&self) -> impl Iterator<Item = &Name> {
        self.copies.values().flatten()
    }
}

/// Replaces the n occurrences of each second-order variable by n fresh
/// copies. First-order variables are not renamed. Occurrence order is
/// left-to-right over the equation sequence, left side before right side,
/// head before arguments.
pub fn linearize(p: &Problem) -> (Problem, CopyMap) {
    let mut fresh = FreshNames::avoiding(p.all_names());
    linearize_with(p, &mut fresh)
}

/// As [`linearize`], drawing fresh names from a caller-owned source.
pub fn linearize_with(p: &Problem, fresh: &mut FreshNames) -> (Problem, CopyMap) {
    let mut copy_map = CopyMap::default();
    let mut new_vars: BTreeMap<Name, crate::term::Type> = p
        .variables
        .iter()
        .filter(|(_, ty)| ty.order() == 1)
        .map(|(n, ty)| (n.clone(), ty.clone()))
        .collect();

    fn rename(
        t: &Term,
        fresh: &mut FreshNames,
        copy_map: &mut CopyMap,
        new_vars: &mut BTreeMap<Name, crate::term::Type>,
    ) -> Term {
        match t {
            Term::Var(n, ty) if ty.order() == 2 => {
                let copy = fresh.fresh_copy(n);
                copy_map
                    .copies
                    .entry(n.clone())
                    .or_default()
                    .push(copy.clone());
                new_vars.insert(copy.clone(), ty.clone());
                Term::Var(copy, ty.clone())
            }
            Term::Var(..) | Term::Const(..) | Term::Bound(_) => t.clone(),
            Term::Abs(ty, body) => Term::abs(
                ty.clone(),
                rename(body, fresh, copy_map, new_vars),
            ),
            Term::App(f, a) => Term::app(
                rename(f, fresh, copy_map, new_vars),
                rename(a, fresh, copy_map, new_vars),
            ),
        }
    }

    // Second-order variables that never occur still get an (empty) entry
    // so reconciliation knows about them.
    for (n, ty) in &p.variables {
        if ty.order() == 2 {
            copy_map.copies.entry(n.clone()).or_default();
        }
    }

    let equations = p
        .equations
        .iter()
        .map(|eq| crate::problem::Equation {
            left: rename(&eq.left, fresh, &mut copy_map, &mut new_vars),
            right: rename(&eq.right, fresh, &mut copy_map, &mut new_vars),
        })
        .collect();

    let linear = Problem {
        sorts: p.sorts.clone(),
        constants: p.constants.clone(),
        variables: new_vars,
        equations,
    };
    debug_assert!(crate::problem::is_linear(&linear));
    (linear, copy_map)
}

/// The verdict of the general procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneralResult {
    /// A finite complete set of unifiers over the original variables
    /// (possibly empty).
    CompleteSet(Vec<Substitution>),
    NoInformation(Diagnostic),
}

/// Why the procedure abstained, pointing at the offending success node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub node_path: String,
    pub reason: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (at {})", self.reason, self.node_path)
    }
}

/// A finalized success node, tagged with the path of the leaf it came from.
#[derive(Debug, Clone)]
pub struct FinalizedSuccess {
    pub path: String,
    pub finalized: FinalizedResult,
}

/// Reconciles the finalized success nodes of the linearized problem back
/// onto the original variables.
///
/// Abstains when any success node kept residual constraints or bound a copy
/// to a non-closed term. Otherwise keeps exactly the nodes on which, for
/// each original variable, all bound copies agree on one closed value;
/// unbound copies impose no constraint. Answers are deduplicated.
pub fn reconcile(
    successes: &[FinalizedSuccess],
    copy_map: &CopyMap,
    original: &Problem,
) -> GeneralResult {
    for s in successes {
        if let FinalizedResult::Residual(_, eqs) = &s.finalized {
            return GeneralResult::NoInformation(Diagnostic {
                node_path: s.path.clone(),
                reason: format!(
                    "success node kept {} residual flex-flex constraint(s), e.g. {}",
                    eqs.len(),
                    eqs[0]
                ),
            });
        }
        let subst = s.finalized.unifier();
        for copy in copy_map.all_copies() {
            if let Some(image) = subst.get(copy) {
                if !image.is_closed() {
                    return GeneralResult::NoInformation(Diagnostic {
                        node_path: s.path.clone(),
                        reason: format!(
                            "copy variable {copy} is bound to the non-closed term {image}"
                        ),
                    });
                }
            }
        }
    }

    // Translation of stray copy names inside first-order images back to
    // their originals.
    let mut back = Substitution::new();
    for (orig, copies) in &copy_map.copies {
        let ty = original
            .variables
            .get(orig)
            .expect("copy map ranges over declared variables");
        for copy in copies {
            back.insert(copy.clone(), ty, Term::var(orig.clone(), ty.clone()))
                .expect("renaming preserves types");
        }
    }

    let original_vars: BTreeSet<Name> = original.variables.keys().cloned().collect();
    let mut answers: Vec<Substitution> = Vec::new();
    'node: for s in successes {
        let subst = s.finalized.unifier();
        let mut answer = Substitution::new();

        for (orig, copies) in &copy_map.copies {
            let ty = original.variables.get(orig).expect("declared");
            let mut common: Option<Term> = None;
            for copy in copies {
                let Some(image) = subst.get(copy) else {
                    continue;
                };
                match &common {
                    None => common = Some(image.clone()),
                    Some(seen) if seen == image => {}
                    Some(_) => continue 'node,
                }
            }
            if let Some(value) = common {
                answer
                    .insert(orig.clone(), ty, value)
                    .expect("copy images have the original's type");
            }
        }

        for (name, ty) in &original.variables {
            if ty.order() != 1 {
                continue;
            }
            if let Some(image) = subst.get(name) {
                answer
                    .insert(name.clone(), ty, back.apply(image))
                    .expect("translated image keeps its type");
            }
        }

        let answer = answer.restricted(&original_vars);
        if !answers.contains(&answer) {
            answers.push(answer);
        }
    }
    GeneralResult::CompleteSet(answers)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneralError {
    #[error("{0}")]
    Invalid(#[from] ValidateError),
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

/// The result of a full run, with the underlying search tree and the
/// number of success leaves it contained.
#[derive(Debug, Clone)]
pub struct GeneralOutcome {
    pub result: GeneralResult,
    pub tree: SearchTree,
    pub successes: usize,
}

/// The full pipeline: validate, linearize, superficialize, solve the
/// linear problem, finalize every success and reconcile. Every substitution
/// in a `CompleteSet` verdict is checked against the original problem.
pub fn general_solve(p: &Problem) -> Result<GeneralOutcome, GeneralError> {
    validate_problem(p)?;
    let mut fresh = FreshNames::avoiding(p.all_names());
    let (linear, copy_map) = linearize_with(p, &mut fresh);
    let (superficial, _trace) = crate::superficialize::superficialize_with(&linear, &mut fresh)?;
    let solution = match solve_linear_with(&superficial, &mut fresh) {
        Ok(s) => s,
        Err(SolveError::Invalid(e)) => return Err(GeneralError::Invalid(e)),
        Err(e) => {
            return Err(GeneralError::Internal(format!(
                "linearized problem rejected by the solver: {e}"
            )))
        }
    };

    let finalized: Vec<FinalizedSuccess> = solution
        .successes
        .iter()
        .map(|leaf| FinalizedSuccess {
            path: leaf.path_string(),
            finalized: finalize_node(leaf),
        })
        .collect();

    let result = reconcile(&finalized, &copy_map, p);
    if let GeneralResult::CompleteSet(answers) = &result {
        for answer in answers {
            if !verify_solution(answer, p) {
                return Err(GeneralError::Internal(format!(
                    "reconciled answer {answer} does not verify the problem"
                )));
            }
        }
    }
    Ok(GeneralOutcome {
        result,
        tree: solution.tree,
        successes: solution.successes.len(),
    })
}
