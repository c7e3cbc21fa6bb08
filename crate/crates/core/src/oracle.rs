//! Independent, deliberately naive reference implementations used to
//! validate the engine: a textbook first-order unifier, a bounded
//! brute-force matcher enumerator, a solution verifier and a seeded problem
//! generator. None of them share code with the solver beyond the term
//! substrate, so agreement between the two is evidence rather than
//! tautology.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::problem::{Equation, Problem};
use crate::subst::Substitution;
use crate::term::{beta_eta_equal, Name, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RobinsonError {
    #[error("head clash between {left} and {right}")]
    HeadClash { left: Name, right: Name },
    #[error("occur check: {var} occurs in {term}")]
    OccurCheck { var: Name, term: Term },
}

/// Robinson's first-order unification by naive recursive descent with occur
/// check. All variables of the problem must be first order; second-order
/// constants are fine as term formers.
pub fn robinson_unify(p: &Problem) -> Result<Substitution, RobinsonError> {
    debug_assert!(
        p.variables.values().all(|ty| ty.order() == 1),
        "robinson_unify expects a first-order problem"
    );
    let mut worklist: Vec<(Term, Term)> = p
        .equations
        .iter()
        .map(|eq| (eq.left.clone(), eq.right.clone()))
        .collect();
    worklist.reverse();
    let mut solution = Substitution::new();

    while let Some((a, b)) = worklist.pop() {
        let a = solution.apply(&a);
        let b = solution.apply(&b);
        if a == b {
            continue;
        }
        match (a.as_free_var(), b.as_free_var()) {
            (Some((x, ty)), _) => {
                bind_var(x.clone(), ty.clone(), &b, &mut solution, &mut worklist)?;
            }
            (_, Some((y, ty))) => {
                bind_var(y.clone(), ty.clone(), &a, &mut solution, &mut worklist)?;
            }
            (None, None) => {
                let (ha, args_a) = a.spine();
                let (hb, args_b) = b.spine();
                let (na, nb) = (head_name(ha), head_name(hb));
                if na != nb {
                    return Err(RobinsonError::HeadClash {
                        left: na.clone(),
                        right: nb.clone(),
                    });
                }
                debug_assert_eq!(args_a.len(), args_b.len());
                for (x, y) in args_a.into_iter().zip(args_b).rev() {
                    worklist.push((x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(solution)
}

fn head_name(head: &Term) -> &Name {
    match head {
        Term::Var(n, _) | Term::Const(n, _) => n,
        _ => unreachable!("first-order spine heads are atomic"),
    }
}

fn bind_var(
    x: Name,
    ty: Type,
    image: &Term,
    solution: &mut Substitution,
    worklist: &mut Vec<(Term, Term)>,
) -> Result<(), RobinsonError> {
    if image.free_vars().contains(&x) {
        return Err(RobinsonError::OccurCheck {
            var: x,
            term: image.clone(),
        });
    }
    let binding =
        Substitution::bind(x, &ty, image.clone()).expect("first-order binding is type-correct");
    for (a, b) in worklist.iter_mut() {
        *a = binding.apply(a);
        *b = binding.apply(b);
    }
    *solution = Substitution::compose(&binding, solution);
    Ok(())
}

/// All closed canonical terms of the given second-order type whose body
/// spine depth is at most `depth_bound` (a leaf has depth 1), built from
/// the problem's constants and the lambda binders.
pub fn closed_terms(ty: &Type, depth_bound: usize, constants: &BTreeMap<Name, Type>) -> Vec<Term> {
    let binder_tys: Vec<Type> = ty.argument_types().into_iter().cloned().collect();
    let codomain = ty.codomain().clone();
    let bodies = gen_bodies(&codomain, depth_bound, &binder_tys, constants);
    bodies
        .into_iter()
        .map(|body| {
            binder_tys
                .iter()
                .rev()
                .fold(body, |b, bty| Term::abs(bty.clone(), b))
        })
        .collect()
}

/// Enumerates spine bodies of base type `target` with depth at most
/// `depth`, over the binders (as de Bruijn indices) and constants.
fn gen_bodies(
    target: &Type,
    depth: usize,
    binder_tys: &[Type],
    constants: &BTreeMap<Name, Type>,
) -> Vec<Term> {
    if depth == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let n = binder_tys.len();
    for (j, bty) in binder_tys.iter().enumerate() {
        if bty == target {
            out.push(Term::Bound(n - 1 - j));
        }
    }
    for (name, cty) in constants {
        if cty.codomain() != target {
            continue;
        }
        let arg_tys = cty.argument_types();
        if arg_tys.is_empty() {
            out.push(Term::constant(name.clone(), cty.clone()));
            continue;
        }
        if depth == 1 {
            continue;
        }
        let per_arg: Vec<Vec<Term>> = arg_tys
            .iter()
            .map(|aty| gen_bodies(aty, depth - 1, binder_tys, constants))
            .collect();
        if per_arg.iter().any(|v| v.is_empty()) {
            continue;
        }
        let head = Term::constant(name.clone(), cty.clone());
        for combo in cartesian(&per_arg) {
            out.push(Term::apps(head.clone(), combo));
        }
    }
    out
}

fn cartesian(per_slot: &[Vec<Term>]) -> Vec<Vec<Term>> {
    let mut out: Vec<Vec<Term>> = vec![Vec::new()];
    for slot in per_slot {
        let mut next = Vec::with_capacity(out.len() * slot.len());
        for prefix in &out {
            for item in slot {
                let mut row = prefix.clone();
                row.push(item.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Exhaustively enumerates the closed matchers of the second-order variable
/// `v` within the spine-depth bound: every closed canonical term `t` of
/// `v`'s type, built from the signature and the binders, such that
/// `{v := t}` solves every equation of `p`.
pub fn enumerate_matchers(v: &Name, p: &Problem, depth_bound: usize) -> BTreeSet<Term> {
    let ty = p
        .variables
        .get(v)
        .expect("matcher variable must be declared")
        .clone();
    let mut out = BTreeSet::new();
    for candidate in closed_terms(&ty, depth_bound, &p.constants) {
        let subst = Substitution::bind(v.clone(), &ty, candidate.clone())
            .expect("candidate built at the variable's type");
        if verify_solution(&subst, p) {
            out.insert(candidate.normalize().expect("candidate is well-typed"));
        }
    }
    out
}

/// True iff the substitution satisfies every equation of the problem up to
/// alpha-beta-eta equality.
pub fn verify_solution(subst: &Substitution, p: &Problem) -> bool {
    p.equations.iter().all(|Equation { left, right }| {
        let l = subst.apply(left);
        let r = subst.apply(right);
        beta_eta_equal(&l, &r).unwrap_or(false)
    })
}

/// Configuration for the seeded problem generator. Identical configurations
/// produce identical problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub max_constants: usize,
    pub max_first_order_vars: usize,
    pub max_second_order_vars: usize,
    pub max_arity: usize,
    pub max_depth: usize,
    pub equation_count: usize,
    pub force_linear: bool,
    pub force_matching: bool,
    pub force_first_order: bool,
}

impl Default for GeneratorConfig {
    fn default() -> GeneratorConfig {
        GeneratorConfig {
            seed: 0,
            max_constants: 4,
            max_first_order_vars: 4,
            max_second_order_vars: 3,
            max_arity: 3,
            max_depth: 3,
            equation_count: 4,
            force_linear: false,
            force_matching: false,
            force_first_order: false,
        }
    }
}

struct Generator {
    rng: ChaCha8Rng,
    sorts: Vec<Name>,
    constants: Vec<(Name, Type)>,
    fo_vars: Vec<(Name, Type)>,
    so_vars: Vec<(Name, Type)>,
    used_so: BTreeSet<Name>,
    cfg: GeneratorConfig,
}

impl Generator {
    fn pick_sort(&mut self) -> Type {
        let i = self.rng.gen_range(0..self.sorts.len());
        Type::Base(self.sorts[i].clone())
    }

    /// A closed ground term of the sort, spine depth at most `depth`.
    fn ground_term(&mut self, sort: &Type, depth: usize) -> Term {
        let nullary: Vec<(Name, Type)> = self
            .constants
            .iter()
            .filter(|(_, ty)| *ty == *sort)
            .cloned()
            .collect();
        let compound: Vec<(Name, Type)> = self
            .constants
            .iter()
            .filter(|(_, ty)| ty.codomain() == sort && ty.arity() > 0)
            .cloned()
            .collect();
        let go_deep = depth > 1 && !compound.is_empty() && self.rng.gen_bool(0.6);
        if go_deep {
            let (name, ty) = compound[self.rng.gen_range(0..compound.len())].clone();
            let arg_tys: Vec<Type> = ty.argument_types().into_iter().cloned().collect();
            let args: Vec<Term> = arg_tys
                .iter()
                .map(|aty| self.ground_term(aty, depth - 1))
                .collect();
            Term::apps(Term::constant(name, ty), args)
        } else {
            // Every sort gets a nullary constant at setup time.
            let (name, ty) = nullary[self.rng.gen_range(0..nullary.len())].clone();
            Term::constant(name, ty)
        }
    }

    /// A term of the sort over constants and first-order variables.
    fn first_order_term(&mut self, sort: &Type, depth: usize) -> Term {
        let vars: Vec<(Name, Type)> = self
            .fo_vars
            .iter()
            .filter(|(_, ty)| *ty == *sort)
            .cloned()
            .collect();
        if !vars.is_empty() && self.rng.gen_bool(0.35) {
            let (name, ty) = vars[self.rng.gen_range(0..vars.len())].clone();
            return Term::var(name, ty);
        }
        let compound: Vec<(Name, Type)> = self
            .constants
            .iter()
            .filter(|(_, ty)| ty.codomain() == sort && ty.arity() > 0)
            .cloned()
            .collect();
        if depth > 1 && !compound.is_empty() && self.rng.gen_bool(0.6) {
            let (name, ty) = compound[self.rng.gen_range(0..compound.len())].clone();
            let arg_tys: Vec<Type> = ty.argument_types().into_iter().cloned().collect();
            let args: Vec<Term> = arg_tys
                .iter()
                .map(|aty| self.first_order_term(aty, depth - 1))
                .collect();
            Term::apps(Term::constant(name, ty), args)
        } else {
            self.ground_term(sort, 1)
        }
    }

    /// A general term of the sort; second-order variables may appear at any
    /// position, subject to the linearity budget.
    fn general_term(&mut self, sort: &Type, depth: usize) -> Term {
        if !self.cfg.force_first_order && depth > 1 && self.rng.gen_bool(0.4) {
            let available: Vec<(Name, Type)> = self
                .so_vars
                .iter()
                .filter(|(n, ty)| {
                    ty.codomain() == sort && !(self.cfg.force_linear && self.used_so.contains(n))
                })
                .cloned()
                .collect();
            if !available.is_empty() {
                let (name, ty) = available[self.rng.gen_range(0..available.len())].clone();
                self.used_so.insert(name.clone());
                let arg_tys: Vec<Type> = ty.argument_types().into_iter().cloned().collect();
                let args: Vec<Term> = arg_tys
                    .iter()
                    .map(|aty| self.general_term(aty, depth - 1))
                    .collect();
                return Term::apps(Term::var(name, ty), args);
            }
        }
        self.first_order_term(sort, depth)
    }
}

/// Generates a valid problem honoring the configuration flags:
/// `force_linear` guarantees linearity, `force_matching` one closed side
/// per equation, `force_first_order` the absence of second-order variables.
pub fn generate_problem(cfg: &GeneratorConfig) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_sorts = rng.gen_range(1..=2usize);
    let sorts: Vec<Name> = (0..n_sorts)
        .map(|i| Name::new(if i == 0 { "i" } else { "o" }))
        .collect();

    // One nullary constant per sort so every sort is inhabited, then the
    // remaining budget with random arities.
    let mut constants: Vec<(Name, Type)> = Vec::new();
    for (i, s) in sorts.iter().enumerate() {
        constants.push((Name::new(format!("c{i}")), Type::Base(s.clone())));
    }
    let n_extra = cfg.max_constants.saturating_sub(sorts.len());
    for k in 0..n_extra {
        let arity = rng.gen_range(0..=cfg.max_arity);
        let args: Vec<Type> = (0..arity)
            .map(|_| Type::Base(sorts[rng.gen_range(0..sorts.len())].clone()))
            .collect();
        let cod = Type::Base(sorts[rng.gen_range(0..sorts.len())].clone());
        constants.push((Name::new(format!("g{k}")), Type::arrow_chain(args, cod)));
    }

    let n_fo = if cfg.force_matching {
        0
    } else {
        rng.gen_range(0..=cfg.max_first_order_vars)
    };
    let fo_vars: Vec<(Name, Type)> = (0..n_fo)
        .map(|k| {
            (
                Name::new(format!("x{k}")),
                Type::Base(sorts[rng.gen_range(0..sorts.len())].clone()),
            )
        })
        .collect();

    let n_so = if cfg.force_first_order {
        0
    } else if cfg.force_matching {
        1
    } else {
        rng.gen_range(1..=cfg.max_second_order_vars.max(1))
    };
    let so_vars: Vec<(Name, Type)> = (0..n_so)
        .map(|k| {
            let arity = rng.gen_range(1..=cfg.max_arity.max(1));
            let args: Vec<Type> = (0..arity)
                .map(|_| Type::Base(sorts[rng.gen_range(0..sorts.len())].clone()))
                .collect();
            let cod = Type::Base(sorts[rng.gen_range(0..sorts.len())].clone());
            (
                Name::new(format!("F{k}")),
                Type::arrow_chain(args, cod),
            )
        })
        .collect();

    let mut gen = Generator {
        rng,
        sorts,
        constants,
        fo_vars,
        so_vars,
        used_so: BTreeSet::new(),
        cfg: cfg.clone(),
    };

    let n_eqs = gen.rng.gen_range(1..=cfg.equation_count.max(1));
    let mut raw = Vec::with_capacity(n_eqs);
    for _ in 0..n_eqs {
        if cfg.force_matching {
            // One flexible side `F a1 ... an` with closed ground arguments
            // against a closed ground right-hand side.
            let (fname, fty) = gen.so_vars[0].clone();
            let arg_tys: Vec<Type> = fty.argument_types().into_iter().cloned().collect();
            let args: Vec<Term> = arg_tys
                .iter()
                .map(|aty| gen.ground_term(aty, cfg.max_depth.saturating_sub(1).max(1)))
                .collect();
            let left = Term::apps(Term::var(fname, fty.clone()), args);
            let codomain = fty.codomain().clone();
            let right = gen.ground_term(&codomain, cfg.max_depth.max(1));
            raw.push((left, right));
        } else {
            let sort = gen.pick_sort();
            let left = gen.general_term(&sort, cfg.max_depth.max(1));
            let right = gen.general_term(&sort, cfg.max_depth.max(1));
            raw.push((left, right));
        }
    }

    let sorts_set: BTreeSet<Name> = gen.sorts.iter().cloned().collect();
    let constants_map: BTreeMap<Name, Type> = gen.constants.iter().cloned().collect();
    let mut variables_map: BTreeMap<Name, Type> = gen.fo_vars.iter().cloned().collect();
    if !cfg.force_first_order {
        variables_map.extend(gen.so_vars.iter().cloned());
    }

    Problem::new(sorts_set, constants_map, variables_map, raw)
        .expect("generated problems are valid by construction")
}
