//! Unification problems: equations between base-typed terms over a declared
//! signature, together with the flexible/rigid classification, the linearity
//! and superficiality predicates, and the termination measure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::subst::Substitution;
use crate::term::{Name, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidateError {
    #[error("equation {index} is not between terms of a base sort")]
    EquationNotBaseType { index: usize },
    #[error("symbol {name} has order {order}, above the second-order limit")]
    SymbolOrderTooHigh { name: Name, order: usize },
    #[error("symbol {name} is not declared")]
    UndeclaredSymbol { name: Name },
    #[error("ill-typed problem: {0}")]
    IllTyped(String),
}

/// An equation between two canonical terms of the same base sort. The pair
/// is unordered; storage is canonically oriented with the rigid side on the
/// right whenever exactly one side is rigid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Equation {
    pub left: Term,
    pub right: Term,
}

impl Equation {
    /// Builds an equation from canonical sides, applying the storage
    /// orientation.
    pub fn oriented(a: Term, b: Term) -> Equation {
        let flip = matches!(
            (classify_term(&a), classify_term(&b)),
            (Head::Rigid(_), Head::Flexible(_))
        );
        if flip {
            Equation { left: b, right: a }
        } else {
            Equation { left: a, right: b }
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.left == self.right
    }

    pub fn apply(&self, subst: &Substitution) -> Equation {
        Equation::oriented(subst.apply(&self.left), subst.apply(&self.right))
    }

    pub fn sides(&self) -> [&Term; 2] {
        [&self.left, &self.right]
    }

    /// Symbol occurrences on both sides.
    pub fn size(&self) -> usize {
        self.left.size() + self.right.size()
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

/// Head classification of an atomic (base-typed, canonical) term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    Flexible(Name),
    Rigid(Name),
}

/// The head symbol of the spine `f a1 ... an`, classified by
/// variable/constant. Total on canonical terms of base type.
pub fn classify_term(t: &Term) -> Head {
    let (head, _) = t.spine();
    match head {
        Term::Var(n, _) => Head::Flexible(n.clone()),
        Term::Const(n, _) => Head::Rigid(n.clone()),
        _ => unreachable!("canonical base-typed term has an atomic head"),
    }
}

/// A unification problem: declared sorts, constants and variables, and a
/// sequence of equations between canonical base-typed terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Problem {
    pub sorts: BTreeSet<Name>,
    pub constants: BTreeMap<Name, Type>,
    pub variables: BTreeMap<Name, Type>,
    pub equations: Vec<Equation>,
}

impl Problem {
    /// Builds a problem from raw (possibly non-normal) equation sides,
    /// normalizing, orienting and validating.
    pub fn new(
        sorts: BTreeSet<Name>,
        constants: BTreeMap<Name, Type>,
        variables: BTreeMap<Name, Type>,
        raw_equations: Vec<(Term, Term)>,
    ) -> Result<Problem, ValidateError> {
        let mut equations = Vec::with_capacity(raw_equations.len());
        for (i, (l, r)) in raw_equations.into_iter().enumerate() {
            let l = l
                .normalize()
                .map_err(|e| ValidateError::IllTyped(format!("equation {i}: {e}")))?;
            let r = r
                .normalize()
                .map_err(|e| ValidateError::IllTyped(format!("equation {i}: {e}")))?;
            let lt = l.infer_type().expect("normal form is well-typed");
            let rt = r.infer_type().expect("normal form is well-typed");
            if lt != rt {
                return Err(ValidateError::IllTyped(format!(
                    "equation {i}: sides have types {lt} and {rt}"
                )));
            }
            if !lt.is_base() {
                return Err(ValidateError::EquationNotBaseType { index: i });
            }
            equations.push(Equation::oriented(l, r));
        }
        let p = Problem {
            sorts,
            constants,
            variables,
            equations,
        };
        validate_problem(&p)?;
        Ok(p)
    }

    pub fn declared_type(&self, name: &Name) -> Option<&Type> {
        self.constants.get(name).or_else(|| self.variables.get(name))
    }

    /// Names of all declared symbols plus everything occurring in
    /// equations; used to seed fresh-name sources.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut names: BTreeSet<Name> = self.sorts.iter().cloned().collect();
        names.extend(self.constants.keys().cloned());
        names.extend(self.variables.keys().cloned());
        for eq in &self.equations {
            for side in eq.sides() {
                names.extend(side.free_var_types().into_keys());
            }
        }
        names
    }

    /// Total symbol occurrences over all equations (the measure's third
    /// component).
    pub fn symbol_size(&self) -> usize {
        self.equations.iter().map(Equation::size).sum()
    }

    /// Distinct first-order variables occurring in the equations.
    pub fn occurring_first_order_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for eq in &self.equations {
            for side in eq.sides() {
                for (n, ty) in side.free_var_types() {
                    if ty.order() == 1 {
                        out.insert(n);
                    }
                }
            }
        }
        out
    }

    /// Occurrence counts of second-order variables across all equations.
    pub fn second_order_occurrences(&self) -> BTreeMap<Name, usize> {
        fn walk(t: &Term, acc: &mut BTreeMap<Name, usize>) {
            match t {
                Term::Var(n, ty) if ty.order() == 2 => {
                    *acc.entry(n.clone()).or_insert(0) += 1;
                }
                Term::Var(..) | Term::Const(..) | Term::Bound(_) => {}
                Term::Abs(_, body) => walk(body, acc),
                Term::App(f, a) => {
                    walk(f, acc);
                    walk(a, acc);
                }
            }
        }
        let mut acc = BTreeMap::new();
        for eq in &self.equations {
            for side in eq.sides() {
                walk(side, &mut acc);
            }
        }
        acc
    }

    /// Applies a substitution to every equation, keeping trivialized
    /// equations in place. Declarations are unchanged.
    pub fn apply_subst(&self, subst: &Substitution) -> Problem {
        Problem {
            sorts: self.sorts.clone(),
            constants: self.constants.clone(),
            variables: self.variables.clone(),
            equations: self.equations.iter().map(|eq| eq.apply(subst)).collect(),
        }
    }

    /// Drops trivial equations `t = t`.
    pub fn without_trivial(&self) -> Problem {
        Problem {
            sorts: self.sorts.clone(),
            constants: self.constants.clone(),
            variables: self.variables.clone(),
            equations: self
                .equations
                .iter()
                .filter(|eq| !eq.is_trivial())
                .cloned()
                .collect(),
        }
    }

    /// Extends the variable declarations.
    pub fn with_variables(&self, extra: impl IntoIterator<Item = (Name, Type)>) -> Problem {
        let mut p = self.clone();
        p.variables.extend(extra);
        p
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sorts {
            writeln!(f, "type {s}.")?;
        }
        for (n, ty) in &self.constants {
            writeln!(f, "const {n} : {ty}.")?;
        }
        for (n, ty) in &self.variables {
            writeln!(f, "var {n} : {ty}.")?;
        }
        for eq in &self.equations {
            writeln!(f, "eq {eq}.")?;
        }
        Ok(())
    }
}

/// Checks all problem invariants: declared sorts, declared symbols of order
/// at most two, well-typed canonical equations of base sort.
pub fn validate_problem(p: &Problem) -> Result<(), ValidateError> {
    let check_sorts = |ty: &Type| -> Result<(), ValidateError> {
        let mut pending = vec![ty];
        while let Some(t) = pending.pop() {
            match t {
                Type::Base(s) => {
                    if !p.sorts.contains(s) {
                        return Err(ValidateError::UndeclaredSymbol { name: s.clone() });
                    }
                }
                Type::Arrow(a, b) => {
                    pending.push(a);
                    pending.push(b);
                }
            }
        }
        Ok(())
    };

    for (name, ty) in p.constants.iter().chain(p.variables.iter()) {
        check_sorts(ty)?;
        let order = ty.order();
        if order > 2 {
            return Err(ValidateError::SymbolOrderTooHigh {
                name: name.clone(),
                order,
            });
        }
    }
    for name in p.constants.keys() {
        if p.variables.contains_key(name) {
            return Err(ValidateError::IllTyped(format!(
                "symbol {name} is declared both as a constant and as a variable"
            )));
        }
    }

    for (i, eq) in p.equations.iter().enumerate() {
        for side in eq.sides() {
            check_declared(side, p)?;
            let norm = side
                .normalize()
                .map_err(|e| ValidateError::IllTyped(format!("equation {i}: {e}")))?;
            if &norm != side {
                return Err(ValidateError::IllTyped(format!(
                    "equation {i}: side {side} is not in canonical form"
                )));
            }
        }
        let lt = eq.left.infer_type().expect("checked above");
        let rt = eq.right.infer_type().expect("checked above");
        if lt != rt {
            return Err(ValidateError::IllTyped(format!(
                "equation {i}: sides have types {lt} and {rt}"
            )));
        }
        if !lt.is_base() {
            return Err(ValidateError::EquationNotBaseType { index: i });
        }
    }
    Ok(())
}

fn check_declared(t: &Term, p: &Problem) -> Result<(), ValidateError> {
    match t {
        Term::Var(n, ty) => match p.variables.get(n) {
            Some(declared) if declared == ty => Ok(()),
            Some(declared) => Err(ValidateError::IllTyped(format!(
                "variable {n} occurs at type {ty} but is declared at {declared}"
            ))),
            None => Err(ValidateError::UndeclaredSymbol { name: n.clone() }),
        },
        Term::Const(n, ty) => match p.constants.get(n) {
            Some(declared) if declared == ty => Ok(()),
            Some(declared) => Err(ValidateError::IllTyped(format!(
                "constant {n} occurs at type {ty} but is declared at {declared}"
            ))),
            None => Err(ValidateError::UndeclaredSymbol { name: n.clone() }),
        },
        Term::Bound(_) => Ok(()),
        Term::Abs(_, body) => check_declared(body, p),
        Term::App(f, a) => {
            check_declared(f, p)?;
            check_declared(a, p)
        }
    }
}

/// True iff every second-order variable occurs at most once across all
/// equations. Constants and first-order variables are unrestricted.
pub fn is_linear(p: &Problem) -> bool {
    p.second_order_occurrences().values().all(|&n| n <= 1)
}

/// True iff second-order variables occur only as head symbols: in every
/// equation `(F a1 ... an) = (G b1 ... bp)`, the arguments contain only
/// first-order variables.
pub fn is_superficial(p: &Problem) -> bool {
    p.equations.iter().all(|eq| {
        eq.sides().iter().all(|side| {
            let (_, args) = side.spine();
            args.iter()
                .all(|a| a.free_var_types().values().all(|ty| ty.order() == 1))
        })
    })
}

/// The termination measure, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure {
    /// Distinct first-order variables occurring in the problem.
    pub v: usize,
    /// Summed sizes of the rigid sides of flexible-rigid equations whose
    /// flexible head is second order, with size counting all symbol
    /// occurrences.
    pub w: usize,
    /// Total symbol occurrences over all equations.
    pub s: usize,
}

impl Measure {
    pub fn vw(&self) -> (usize, usize) {
        (self.v, self.w)
    }

    pub fn as_triple(&self) -> (usize, usize, usize) {
        (self.v, self.w, self.s)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.v, self.w, self.s)
    }
}

/// The multiset of rigid sides of flexible-rigid equations whose flexible
/// head variable is second order.
pub fn weighted_rigid_terms(p: &Problem) -> Vec<&Term> {
    let mut out = Vec::new();
    for eq in &p.equations {
        let heads = (classify_term(&eq.left), classify_term(&eq.right));
        if let (Head::Flexible(_), Head::Rigid(_)) = heads {
            let (head, _) = eq.left.spine();
            if let Some((_, ty)) = head.as_free_var() {
                if ty.order() == 2 {
                    out.push(&eq.right);
                }
            }
        }
    }
    out
}

/// Computes the measure `(v, w, s)` of a problem.
pub fn measure(p: &Problem) -> Measure {
    Measure {
        v: p.occurring_first_order_vars().len(),
        w: weighted_rigid_terms(p).iter().map(|t| t.size()).sum(),
        s: p.symbol_size(),
    }
}

/// The weight component computed with the variable-occurrence size `|t|`
/// instead of the symbol-occurrence size. Reported for transparency: this
/// variant does not strictly decrease under imitation on ground rigid
/// terms, which is why `measure` counts all symbols.
pub fn literal_variable_weight(p: &Problem) -> usize {
    weighted_rigid_terms(p)
        .iter()
        .map(|t| t.variable_occurrences())
        .sum()
}

#[allow(unused)]
fn _assert_types_are_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<Problem>();
    check::<Equation>();
    check::<Measure>();
}
