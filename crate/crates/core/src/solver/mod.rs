//! The unification tree for superficial linear problems.
//!
//! Each node holds a superficial linear problem. Deterministic
//! simplification steps (rigid-rigid decomposition and first-order binding
//! with occur check) are applied eagerly, one tree edge per step; when none
//! applies, the leftmost flexible-rigid equation whose flexible head is
//! second order branches into its projection children followed by the
//! imitation child. Nodes with only flexible-flexible equations left are
//! success leaves. Every edge strictly decreases the measure `(v, w, s)`
//! lexicographically, which is why the tree is finite.

pub mod export;

use std::fmt;

use thiserror::Error;

use crate::fresh::FreshNames;
use crate::problem::{
    classify_term, is_linear, is_superficial, measure, validate_problem, Equation, Head, Measure,
    Problem, ValidateError,
};
use crate::subst::Substitution;
use crate::term::{Name, Term, Type};

/// The label of the edge leading to a node; labels fully determine the
/// child problem given the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepLabel {
    /// Rigid-rigid decomposition of the equation at the index.
    Decompose(usize),
    /// Binding of a first-order variable, with occur check already passed.
    BindFirstOrder(Name, Term),
    /// Imitation of the rigid head constant by the second-order variable.
    Imitate(Name, Name),
    /// Projection of the second-order variable onto its i-th argument
    /// (1-based).
    Project(Name, usize),
    /// Deferral of the remaining flexible-flexible equations into a
    /// success leaf.
    FlexFlexDefer,
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLabel::Decompose(i) => write!(f, "Decompose({i})"),
            StepLabel::BindFirstOrder(x, t) => write!(f, "BindFirstOrder({x} := {t})"),
            StepLabel::Imitate(v, c) => write!(f, "Imitate({v}, {c})"),
            StepLabel::Project(v, i) => write!(f, "Project({v}, {i})"),
            StepLabel::FlexFlexDefer => write!(f, "FlexFlexDefer"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureCause {
    HeadClash,
    OccurCheck,
    /// Present for totality; unreachable on valid superficial problems
    /// because imitation always applies to a flex-rigid equation.
    NoBranchApplicable,
}

impl fmt::Display for FailureCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureCause::HeadClash => write!(f, "HeadClash"),
            FailureCause::OccurCheck => write!(f, "OccurCheck"),
            FailureCause::NoBranchApplicable => write!(f, "NoBranchApplicable"),
        }
    }
}

/// A leaf outcome of the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Failure(FailureCause),
    Success {
        pre_unifier: Substitution,
        residual: Vec<Equation>,
    },
}

/// A node of the search: the current problem, the substitution accumulated
/// along the path, the path of step labels from the root, and the measure.
#[derive(Debug, Clone)]
pub struct SearchNode {
    pub problem: Problem,
    pub accumulated: Substitution,
    pub path: Vec<StepLabel>,
    pub measure: Measure,
}

impl SearchNode {
    /// Root node over a cleaned (trivial-free) problem.
    pub fn root(problem: &Problem) -> SearchNode {
        let problem = problem.without_trivial();
        let m = measure(&problem);
        SearchNode {
            problem,
            accumulated: Substitution::new(),
            path: Vec::new(),
            measure: m,
        }
    }

    pub fn path_string(&self) -> String {
        path_string(&self.path)
    }
}

pub(crate) fn path_string(path: &[StepLabel]) -> String {
    let mut s = String::from("root");
    for step in path {
        s.push('/');
        s.push_str(&step.to_string());
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeStatus {
    Internal,
    Success,
    Failure(FailureCause),
}

/// One explored node of the unification tree, with the edge label that
/// produced it (`None` at the root).
#[derive(Debug, Clone)]
pub struct TreeNode {
    pub problem: Problem,
    pub step: Option<StepLabel>,
    pub measure: Measure,
    pub status: NodeStatus,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(TreeNode::node_count).sum::<usize>()
    }
}

/// The fully explored unification tree.
#[derive(Debug, Clone)]
pub struct SearchTree {
    pub root: TreeNode,
}

impl SearchTree {
    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// All parent/child pairs, in canonical (depth-first) order.
    pub fn edges(&self) -> Vec<(&TreeNode, &TreeNode)> {
        let mut out = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            for child in node.children.iter().rev() {
                out.push((node, child));
                stack.push(child);
            }
        }
        out
    }
}

/// A success leaf: the accumulated pre-unifier and the residual
/// flexible-flexible constraints, tagged with the leaf's path.
#[derive(Debug, Clone)]
pub struct SuccessLeaf {
    pub path: Vec<StepLabel>,
    pub pre_unifier: Substitution,
    pub residual: Vec<Equation>,
}

impl SuccessLeaf {
    pub fn path_string(&self) -> String {
        path_string(&self.path)
    }
}

/// The result of a complete exploration.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub tree: SearchTree,
    pub successes: Vec<SuccessLeaf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("{0}")]
    Invalid(#[from] ValidateError),
    #[error("problem is not superficial; superficialize it first")]
    NotSuperficial,
    #[error("problem is not linear; use the general procedure instead")]
    NotLinear,
}

// ---------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------

enum SimplifyAction {
    Decompose {
        index: usize,
    },
    Bind {
        index: usize,
        var: Name,
        var_ty: Type,
        image: Term,
    },
    Clash,
    Occur,
}

/// Finds the leftmost equation admitting a deterministic simplification
/// step: rigid-rigid decomposition (or head clash), or a first-order
/// binding `x = b` where every variable of `b` is first order (or occur
/// check failure).
fn find_simplification(p: &Problem) -> Option<SimplifyAction> {
    for (index, eq) in p.equations.iter().enumerate() {
        match (classify_term(&eq.left), classify_term(&eq.right)) {
            (Head::Rigid(l), Head::Rigid(r)) => {
                return Some(if l == r {
                    SimplifyAction::Decompose { index }
                } else {
                    SimplifyAction::Clash
                });
            }
            _ => {
                if let Some(action) = first_order_binding(index, eq) {
                    return Some(action);
                }
            }
        }
    }
    None
}

/// The binding rule for `x = b` with `x` first order and all variables of
/// `b` first order. When both sides are variables, the later name is bound
/// to the earlier one so user-named variables survive in answers.
fn first_order_binding(index: usize, eq: &Equation) -> Option<SimplifyAction> {
    let left_var = bare_first_order(&eq.left);
    let right_var = bare_first_order(&eq.right);
    let (var, var_ty, image) = match (left_var, right_var) {
        (Some((x, xt)), Some((y, _))) => {
            if name_precedes(x, y) {
                (y.clone(), xt.clone(), eq.left.clone())
            } else {
                (x.clone(), xt.clone(), eq.right.clone())
            }
        }
        (Some((x, xt)), None) => (x.clone(), xt.clone(), eq.right.clone()),
        (None, Some((y, yt))) => (y.clone(), yt.clone(), eq.left.clone()),
        (None, None) => return None,
    };
    if !image
        .free_var_types()
        .values()
        .all(|ty| ty.order() == 1)
    {
        // The other side heads a second-order variable: flex-flex, deferred.
        return None;
    }
    if image.free_vars().contains(&var) {
        return Some(SimplifyAction::Occur);
    }
    Some(SimplifyAction::Bind {
        index,
        var,
        var_ty,
        image,
    })
}

fn bare_first_order(t: &Term) -> Option<(&Name, &Type)> {
    t.as_free_var().filter(|(_, ty)| ty.order() == 1)
}

/// Ordering used to orient variable-variable bindings: user names precede
/// generated names; within each class, lexicographic with numeric suffixes
/// compared as numbers.
fn name_precedes(a: &Name, b: &Name) -> bool {
    fn key(n: &Name) -> (bool, String, usize) {
        let s = n.as_str();
        let digits = s.chars().rev().take_while(|c| c.is_ascii_digit()).count();
        let (stem, num) = s.split_at(s.len() - digits);
        (
            n.is_generated(),
            stem.to_string(),
            num.parse().unwrap_or(0),
        )
    }
    key(a) < key(b)
}

fn decompose_equation(eq: &Equation) -> Vec<Equation> {
    let (_, largs) = eq.left.spine();
    let (_, rargs) = eq.right.spine();
    debug_assert_eq!(largs.len(), rargs.len());
    largs
        .into_iter()
        .zip(rargs)
        .map(|(a, b)| Equation::oriented(a.clone(), b.clone()))
        .collect()
}

/// One simplification step on a node: `None` when the node is
/// simplification-normal, otherwise the labeled child or the failure
/// cause manifest at this node.
pub fn simplify_step(node: &SearchNode) -> Option<Result<(StepLabel, SearchNode), FailureCause>> {
    let action = find_simplification(&node.problem)?;
    Some(match action {
        SimplifyAction::Clash => Err(FailureCause::HeadClash),
        SimplifyAction::Occur => Err(FailureCause::OccurCheck),
        SimplifyAction::Decompose { index } => {
            let mut equations = node.problem.equations.clone();
            let replaced = equations.remove(index);
            for (k, new_eq) in decompose_equation(&replaced).into_iter().enumerate() {
                equations.insert(index + k, new_eq);
            }
            let mut problem = node.problem.clone();
            problem.equations = equations;
            let problem = problem.without_trivial();
            let label = StepLabel::Decompose(index);
            let m = measure(&problem);
            let mut path = node.path.clone();
            path.push(label.clone());
            Ok((
                label,
                SearchNode {
                    problem,
                    accumulated: node.accumulated.clone(),
                    path,
                    measure: m,
                },
            ))
        }
        SimplifyAction::Bind {
            index,
            var,
            var_ty,
            image,
        } => {
            let binding = Substitution::bind(var.clone(), &var_ty, image.clone())
                .expect("first-order binding is type-correct");
            let mut problem = node.problem.clone();
            problem.equations.remove(index);
            let problem = problem.apply_subst(&binding).without_trivial();
            let label = StepLabel::BindFirstOrder(var, image);
            let m = measure(&problem);
            let mut path = node.path.clone();
            path.push(label.clone());
            Ok((
                label,
                SearchNode {
                    problem,
                    accumulated: Substitution::compose(&binding, &node.accumulated),
                    path,
                    measure: m,
                },
            ))
        }
    })
}

/// Runs simplification to fixpoint, returning the simplification-normal
/// node or the failure cause. The intermediate chain is discarded; the
/// tree-building driver records it.
pub fn simplify_node(node: &SearchNode) -> Result<SearchNode, FailureCause> {
    let mut cur = node.clone();
    while let Some(step) = simplify_step(&cur) {
        let (_, next) = step?;
        cur = next;
    }
    Ok(cur)
}

// ---------------------------------------------------------------------
// Branching
// ---------------------------------------------------------------------

/// The result of expanding a simplification-normal node.
#[derive(Debug, Clone)]
pub enum Expansion {
    /// Projection children (in argument order) followed by the imitation
    /// child. Children are not yet simplified.
    Branches(Vec<SearchNode>),
    /// No flexible-rigid equation with a second-order head remains.
    Finished(Outcome),
}

/// Finds the leftmost flexible-rigid equation whose flexible head is
/// second order and produces the projection and imitation children; if none
/// exists the node is a success with the remaining flex-flex equations as
/// residual.
pub fn expand_node(node: &SearchNode, fresh: &mut FreshNames) -> Expansion {
    let target = node.problem.equations.iter().enumerate().find(|(_, eq)| {
        matches!(
            (classify_term(&eq.left), classify_term(&eq.right)),
            (Head::Flexible(_), Head::Rigid(_))
        ) && eq
            .left
            .spine()
            .0
            .as_free_var()
            .is_some_and(|(_, ty)| ty.order() == 2)
    });

    let Some((_, eq)) = target else {
        return Expansion::Finished(Outcome::Success {
            pre_unifier: node.accumulated.clone(),
            residual: node.problem.equations.clone(),
        });
    };

    let (flex_head, _) = eq.left.spine();
    let (f_name, f_ty) = flex_head.as_free_var().expect("flexible head is a variable");
    let f_name = f_name.clone();
    let f_ty = f_ty.clone();
    let arg_tys: Vec<Type> = f_ty.argument_types().into_iter().cloned().collect();
    let beta = f_ty.codomain().clone();
    let n = arg_tys.len();

    let (rigid_head, rigid_args) = eq.right.spine();
    let (phi_name, phi_ty) = match rigid_head {
        Term::Const(nm, ty) => (nm.clone(), ty.clone()),
        _ => unreachable!("rigid head is a constant"),
    };
    let p_arity = rigid_args.len();

    let mut children = Vec::new();

    // Projections: f := \x1...xn. xi, allowed only when Ti equals the
    // equation's base sort.
    for (i, ti) in arg_tys.iter().enumerate() {
        if *ti == beta {
            let body = Term::Bound(n - 1 - i);
            let image = arg_tys
                .iter()
                .rev()
                .fold(body, |b, ty| Term::abs(ty.clone(), b));
            children.push(make_child(
                node,
                StepLabel::Project(f_name.clone(), i + 1),
                &f_name,
                &f_ty,
                image,
                Vec::new(),
            ));
        }
    }

    // Imitation: f := \x1...xn. phi (#h1 x1...xn) ... (#hp x1...xn).
    let phi_arg_tys: Vec<Type> = phi_ty.argument_types().into_iter().cloned().collect();
    debug_assert_eq!(phi_arg_tys.len(), p_arity);
    let mut fresh_vars: Vec<(Name, Type)> = Vec::with_capacity(p_arity);
    let mut imitation_args = Vec::with_capacity(p_arity);
    for s_j in &phi_arg_tys {
        let h_name = fresh.fresh("h");
        let h_ty = Type::arrow_chain(arg_tys.iter().cloned(), s_j.clone());
        let binder_refs: Vec<Term> = (0..n).map(|k| Term::Bound(n - 1 - k)).collect();
        imitation_args.push(Term::apps(
            Term::var(h_name.clone(), h_ty.clone()),
            binder_refs,
        ));
        fresh_vars.push((h_name, h_ty));
    }
    let body = Term::apps(Term::constant(phi_name.clone(), phi_ty), imitation_args);
    let image = arg_tys
        .iter()
        .rev()
        .fold(body, |b, ty| Term::abs(ty.clone(), b));
    children.push(make_child(
        node,
        StepLabel::Imitate(f_name.clone(), phi_name),
        &f_name,
        &f_ty,
        image,
        fresh_vars,
    ));

    Expansion::Branches(children)
}

fn make_child(
    parent: &SearchNode,
    label: StepLabel,
    var: &Name,
    var_ty: &Type,
    image: Term,
    extra_vars: Vec<(Name, Type)>,
) -> SearchNode {
    let binding =
        Substitution::bind(var.clone(), var_ty, image).expect("branch binding is type-correct");
    let problem = parent
        .problem
        .with_variables(extra_vars)
        .apply_subst(&binding)
        .without_trivial();
    let m = measure(&problem);
    let mut path = parent.path.clone();
    path.push(label);
    SearchNode {
        problem,
        accumulated: Substitution::compose(&binding, &parent.accumulated),
        path,
        measure: m,
    }
}

// ---------------------------------------------------------------------
// The driver
// ---------------------------------------------------------------------

/// Completely explores the unification tree of a valid, superficial,
/// linear problem. Successes are reported in canonical path order.
pub fn solve_linear(p: &Problem) -> Result<LinearSolution, SolveError> {
    let mut fresh = FreshNames::avoiding(p.all_names());
    solve_linear_with(p, &mut fresh)
}

/// As [`solve_linear`], drawing fresh names from a caller-owned source.
pub fn solve_linear_with(
    p: &Problem,
    fresh: &mut FreshNames,
) -> Result<LinearSolution, SolveError> {
    validate_problem(p)?;
    if !is_superficial(p) {
        return Err(SolveError::NotSuperficial);
    }
    if !is_linear(p) {
        return Err(SolveError::NotLinear);
    }
    let root = SearchNode::root(p);
    let mut successes = Vec::new();
    let root_node = explore(root, fresh, &mut successes);
    Ok(LinearSolution {
        tree: SearchTree { root: root_node },
        successes,
    })
}

fn explore(node: SearchNode, fresh: &mut FreshNames, successes: &mut Vec<SuccessLeaf>) -> TreeNode {
    debug_assert!(is_superficial(&node.problem) && is_linear(&node.problem));
    let step = node.path.last().cloned();
    let measure = node.measure;

    if let Some(result) = simplify_step(&node) {
        return match result {
            Err(cause) => TreeNode {
                problem: node.problem,
                step,
                measure,
                status: NodeStatus::Failure(cause),
                children: Vec::new(),
            },
            Ok((_, child)) => {
                let child_node = explore(child, fresh, successes);
                TreeNode {
                    problem: node.problem,
                    step,
                    measure,
                    status: NodeStatus::Internal,
                    children: vec![child_node],
                }
            }
        };
    }

    match expand_node(&node, fresh) {
        Expansion::Branches(children) => {
            let children = children
                .into_iter()
                .map(|c| explore(c, fresh, successes))
                .collect();
            TreeNode {
                problem: node.problem,
                step,
                measure,
                status: NodeStatus::Internal,
                children,
            }
        }
        Expansion::Finished(Outcome::Failure(cause)) => TreeNode {
            problem: node.problem,
            step,
            measure,
            status: NodeStatus::Failure(cause),
            children: Vec::new(),
        },
        Expansion::Finished(Outcome::Success {
            pre_unifier,
            residual,
        }) => {
            if residual.is_empty() {
                successes.push(SuccessLeaf {
                    path: node.path.clone(),
                    pre_unifier,
                    residual,
                });
                TreeNode {
                    problem: node.problem,
                    step,
                    measure,
                    status: NodeStatus::Success,
                    children: Vec::new(),
                }
            } else {
                // The residual moves out of the problem into the outcome;
                // the success leaf itself carries an empty problem.
                let mut leaf_path = node.path.clone();
                leaf_path.push(StepLabel::FlexFlexDefer);
                successes.push(SuccessLeaf {
                    path: leaf_path,
                    pre_unifier,
                    residual,
                });
                let mut empty = node.problem.clone();
                empty.equations.clear();
                let leaf = TreeNode {
                    problem: empty.clone(),
                    step: Some(StepLabel::FlexFlexDefer),
                    measure: measure_of_empty(),
                    status: NodeStatus::Success,
                    children: Vec::new(),
                };
                TreeNode {
                    problem: node.problem,
                    step,
                    measure,
                    status: NodeStatus::Internal,
                    children: vec![leaf],
                }
            }
        }
    }
}

fn measure_of_empty() -> Measure {
    Measure { v: 0, w: 0, s: 0 }
}

// ---------------------------------------------------------------------
// Finalization of success nodes
// ---------------------------------------------------------------------

/// The result of eliminating `x = t` residual constraints from a success
/// node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinalizedResult {
    /// The residual emptied; the substitution is a unifier.
    Empty(Substitution),
    /// Constraints remain (both heads second order, or `x` free in `t`).
    Residual(Substitution, Vec<Equation>),
}

impl FinalizedResult {
    pub fn unifier(&self) -> &Substitution {
        match self {
            FinalizedResult::Empty(s) => s,
            FinalizedResult::Residual(s, _) => s,
        }
    }

    pub fn residual(&self) -> &[Equation] {
        match self {
            FinalizedResult::Empty(_) => &[],
            FinalizedResult::Residual(_, eqs) => eqs,
        }
    }
}

/// Repeatedly eliminates residual equations of shape `x = t` where `x` is a
/// first-order variable not free in `t`, substituting `t` for `x`.
pub fn finalize_node(leaf: &SuccessLeaf) -> FinalizedResult {
    let mut subst = leaf.pre_unifier.clone();
    let mut residual = leaf.residual.clone();
    loop {
        let next = residual.iter().enumerate().find_map(|(i, eq)| {
            for (this, other) in [(&eq.left, &eq.right), (&eq.right, &eq.left)] {
                if let Some((x, ty)) = bare_first_order(this) {
                    if !other.free_vars().contains(x) {
                        return Some((i, x.clone(), ty.clone(), other.clone()));
                    }
                }
            }
            None
        });
        let Some((i, x, ty, image)) = next else {
            break;
        };
        let binding = Substitution::bind(x, &ty, image).expect("residual binding is type-correct");
        residual.remove(i);
        residual = residual
            .iter()
            .map(|eq| eq.apply(&binding))
            .filter(|eq| !eq.is_trivial())
            .collect();
        subst = Substitution::compose(&binding, &subst);
    }
    if residual.is_empty() {
        FinalizedResult::Empty(subst)
    } else {
        FinalizedResult::Residual(subst, residual)
    }
}

/// A concrete unifier instance of a finalized outcome. For an `Empty`
/// outcome this is the unifier itself; for a `Residual` outcome every
/// unbound second-order head is collapsed onto one fresh first-order
/// variable per base sort, which satisfies all remaining flex-flex
/// constraints.
pub fn canonical_instance(fin: &FinalizedResult) -> Substitution {
    match fin {
        FinalizedResult::Empty(s) => s.clone(),
        FinalizedResult::Residual(subst, residual) => {
            let mut names: Vec<Name> = subst.domain().into_iter().collect();
            for eq in residual {
                for side in eq.sides() {
                    names.extend(side.free_var_types().into_keys());
                }
            }
            let mut fresh = FreshNames::avoiding(names);

            let mut per_sort: std::collections::BTreeMap<Type, Name> = Default::default();
            let mut collapse = Substitution::new();
            for eq in residual {
                for side in eq.sides() {
                    for (name, ty) in side.free_var_types() {
                        if ty.order() == 2 && !collapse.contains(&name) {
                            let sort = ty.codomain().clone();
                            let u = per_sort
                                .entry(sort.clone())
                                .or_insert_with(|| fresh.fresh("u"))
                                .clone();
                            let body = Term::var(u, sort.clone());
                            let image = ty
                                .argument_types()
                                .into_iter()
                                .cloned()
                                .collect::<Vec<_>>()
                                .into_iter()
                                .rev()
                                .fold(body, |b, t| Term::abs(t, b));
                            collapse
                                .insert(name, &ty, image)
                                .expect("collapse image matches the head type");
                        }
                    }
                }
            }

            let mut result = Substitution::compose(&collapse, subst);
            let mut eqs: Vec<Equation> = residual
                .iter()
                .map(|eq| eq.apply(&collapse))
                .filter(|eq| !eq.is_trivial())
                .collect();
            // What remains has shape x = u; bind it away.
            while let Some(eq) = eqs.first().cloned() {
                let (x, ty, image) = match (bare_first_order(&eq.left), bare_first_order(&eq.right))
                {
                    (Some((x, ty)), _) => (x.clone(), ty.clone(), eq.right.clone()),
                    (_, Some((y, ty))) => (y.clone(), ty.clone(), eq.left.clone()),
                    _ => unreachable!("collapsed residuals relate first-order terms"),
                };
                let binding =
                    Substitution::bind(x, &ty, image).expect("collapsed binding is type-correct");
                eqs = eqs
                    .iter()
                    .map(|e| e.apply(&binding))
                    .filter(|e| !e.is_trivial())
                    .collect();
                result = Substitution::compose(&binding, &result);
            }
            result
        }
    }
}
