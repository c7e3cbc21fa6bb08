//! Flattening of arbitrary problems into superficial form.
//!
//! While some equation has a side `(F ... a ...)` with a non-variable
//! argument `a`, the argument is replaced by a fresh first-order variable
//! `x` and the auxiliary equation `x = a` is appended. The rewrite fires on
//! any non-variable argument, including ground ones, so in the output every
//! argument position is a variable.

use crate::fresh::FreshNames;
use crate::problem::{validate_problem, Equation, Problem, ValidateError};
use crate::term::{Name, Term};

/// One flattening step: `introduced` replaced `extracted` inside equation
/// `source_equation` of the problem as it stood at that moment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlattenStep {
    pub introduced: Name,
    pub extracted: Term,
    pub source_equation: usize,
}

/// The sequence of flattening steps. Replaying the steps as a simultaneous
/// substitution on the output problem restores the original equations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlatteningTrace {
    pub steps: Vec<FlattenStep>,
}

impl FlatteningTrace {
    /// The introduced variables, in introduction order.
    pub fn introduced(&self) -> Vec<&Name> {
        self.steps.iter().map(|s| &s.introduced).collect()
    }

    /// The replay substitution `{#x1 := a1, ...}`.
    pub fn as_substitution(&self) -> crate::subst::Substitution {
        let mut subst = crate::subst::Substitution::new();
        for step in &self.steps {
            let ty = step
                .extracted
                .infer_type()
                .expect("extracted subterms are well-typed");
            subst
                .insert(step.introduced.clone(), &ty, step.extracted.clone())
                .expect("trace bindings are type-correct");
        }
        subst
    }
}

/// Transforms a valid problem into an equivalent superficial one. Linearity
/// is preserved. Fresh variables are drawn from the `#x` namespace.
pub fn superficialize(p: &Problem) -> Result<(Problem, FlatteningTrace), ValidateError> {
    let mut fresh = FreshNames::avoiding(p.all_names());
    superficialize_with(p, &mut fresh)
}

/// As [`superficialize`], drawing fresh names from a caller-owned source so
/// a pipeline can share one namespace.
pub fn superficialize_with(
    p: &Problem,
    fresh: &mut FreshNames,
) -> Result<(Problem, FlatteningTrace), ValidateError> {
    validate_problem(p)?;
    let mut out = p.clone();
    let mut trace = FlatteningTrace::default();
    let step_bound = p.symbol_size();

    // Leftmost equation, left side before right side, leftmost argument.
    while let Some((eq_idx, side_idx, arg_idx)) = find_flattening_redex(&out) {
        assert!(
            trace.steps.len() < step_bound,
            "flattening exceeded its step bound"
        );
        let eq = &out.equations[eq_idx];
        let side = eq.sides()[side_idx];
        let (head, args) = side.spine();
        let extracted = args[arg_idx].clone();
        let arg_ty = extracted
            .infer_type()
            .expect("arguments of a valid problem are well-typed");
        debug_assert!(arg_ty.is_base());

        let x = fresh.fresh("x");
        let mut new_args: Vec<Term> = args.iter().map(|a| (*a).clone()).collect();
        new_args[arg_idx] = Term::var(x.clone(), arg_ty.clone());
        let new_side = Term::apps(head.clone(), new_args);

        let (left, right) = if side_idx == 0 {
            (new_side, eq.right.clone())
        } else {
            (eq.left.clone(), new_side)
        };
        out.variables.insert(x.clone(), arg_ty.clone());
        out.equations[eq_idx] = Equation::oriented(left, right);
        out.equations
            .push(Equation::oriented(Term::var(x.clone(), arg_ty), extracted.clone()));
        trace.steps.push(FlattenStep {
            introduced: x,
            extracted,
            source_equation: eq_idx,
        });
    }

    debug_assert!(crate::problem::is_superficial(&out));
    Ok((out, trace))
}

fn find_flattening_redex(p: &Problem) -> Option<(usize, usize, usize)> {
    for (eq_idx, eq) in p.equations.iter().enumerate() {
        for (side_idx, side) in eq.sides().iter().enumerate() {
            let (_, args) = side.spine();
            for (arg_idx, arg) in args.iter().enumerate() {
                if arg.as_free_var().is_none() {
                    return Some((eq_idx, side_idx, arg_idx));
                }
            }
        }
    }
    None
}
