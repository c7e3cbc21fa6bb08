//! Simply typed lambda terms with alpha/beta/eta equality.
//!
//! Bound variables are de Bruijn indices, so structural equality *is*
//! alpha-equivalence. Free variables and constants are globally named and
//! carry their type at each occurrence. The canonical form used everywhere
//! else in the crate is beta-normal eta-long: a term of base type is always
//! an application spine `f a1 ... an` with a variable or constant at the
//! head.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A global symbol name. Names starting with `#` are reserved for
/// machine-generated symbols and are rejected by the input grammar.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(String);

impl Name {
    pub fn new(s: impl Into<String>) -> Name {
        Name(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True for names issued by [`crate::fresh::FreshNames`].
    pub fn is_generated(&self) -> bool {
        self.0.starts_with('#')
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Name {
        Name(s)
    }
}

/// Simple types: base sorts and arrows. Structural equality is the only
/// type equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Base(Name),
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn base(name: impl Into<Name>) -> Type {
        Type::Base(name.into())
    }

    pub fn arrow(domain: Type, codomain: Type) -> Type {
        Type::Arrow(Box::new(domain), Box::new(codomain))
    }

    /// Builds `args[0] -> ... -> args[n-1] -> codomain`.
    pub fn arrow_chain(args: impl IntoIterator<Item = Type>, codomain: Type) -> Type {
        let args: Vec<Type> = args.into_iter().collect();
        args.into_iter()
            .rev()
            .fold(codomain, |cod, dom| Type::arrow(dom, cod))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Type::Base(_))
    }

    /// order(Base) = 1; order(T1 -> ... -> Tn -> b) = 1 + max_i order(Ti).
    pub fn order(&self) -> usize {
        match self {
            Type::Base(_) => 1,
            _ => {
                1 + self
                    .argument_types()
                    .iter()
                    .map(|t| t.order())
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    /// Number of arguments before the final base sort.
    pub fn arity(&self) -> usize {
        self.argument_types().len()
    }

    /// The types T1, ..., Tn of `T1 -> ... -> Tn -> b`.
    pub fn argument_types(&self) -> Vec<&Type> {
        let mut args = Vec::new();
        let mut cur = self;
        while let Type::Arrow(dom, cod) = cur {
            args.push(dom.as_ref());
            cur = cod;
        }
        args
    }

    /// The final base sort of the arrow chain.
    pub fn codomain(&self) -> &Type {
        let mut cur = self;
        while let Type::Arrow(_, cod) = cur {
            cur = cod;
        }
        cur
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(n) => write!(f, "{n}"),
            Type::Arrow(dom, cod) => {
                if dom.is_base() {
                    write!(f, "{dom} -> {cod}")
                } else {
                    write!(f, "({dom}) -> {cod}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("applied a term of non-function type {0}")]
    NotAFunction(Type),
    #[error("argument type mismatch: expected {expected}, found {found}")]
    ArgumentMismatch { expected: Type, found: Type },
    #[error("bound variable index {0} escapes its binder")]
    UnboundIndex(usize),
    #[error("cannot compare terms of different types: {left} vs {right}")]
    TypeMismatch { left: Type, right: Type },
}

/// A lambda term. `Bound` indices refer to enclosing `Abs` binders; a term
/// is well-formed at top level only when every index is under a binder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name, Type),
    Const(Name, Type),
    Bound(usize),
    Abs(Type, Box<Term>),
    App(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<Name>, ty: Type) -> Term {
        Term::Var(name.into(), ty)
    }

    pub fn constant(name: impl Into<Name>, ty: Type) -> Term {
        Term::Const(name.into(), ty)
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// `head a1 ... an`.
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn abs(binder_ty: Type, body: Term) -> Term {
        Term::Abs(binder_ty, Box::new(body))
    }

    /// Abstracts the free variable `name`: occurrences become the new
    /// binder. This is how named syntax is turned into de Bruijn form.
    pub fn lam(name: impl Into<Name>, binder_ty: Type, body: Term) -> Term {
        let name = name.into();
        Term::abs(binder_ty, close(&body, &name, 0))
    }

    /// Splits into (head, arguments); the head is never an `App`.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// True for a bare free variable occurrence.
    pub fn as_free_var(&self) -> Option<(&Name, &Type)> {
        match self {
            Term::Var(n, t) => Some((n, t)),
            _ => None,
        }
    }

    /// Total number of symbol occurrences (free variables, constants and
    /// bound-variable occurrences; binders and application nodes are not
    /// symbols).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(..) | Term::Const(..) | Term::Bound(_) => 1,
            Term::Abs(_, body) => body.size(),
            Term::App(f, a) => f.size() + a.size(),
        }
    }

    /// Number of free-variable occurrences, the weight used verbatim by the
    /// source analysis (see `Problem::literal_variable_weight`).
    pub fn variable_occurrences(&self) -> usize {
        match self {
            Term::Var(..) => 1,
            Term::Const(..) | Term::Bound(_) => 0,
            Term::Abs(_, body) => body.variable_occurrences(),
            Term::App(f, a) => f.variable_occurrences() + a.variable_occurrences(),
        }
    }

    /// Nesting depth of application spines: a leaf has depth 1 and
    /// `f a1 ... an` has depth 1 + max depth of the `ai`. Binders are
    /// transparent.
    pub fn spine_depth(&self) -> usize {
        match self {
            Term::Abs(_, body) => body.spine_depth(),
            _ => {
                let (_, args) = self.spine();
                1 + args.iter().map(|a| a.spine_depth()).max().unwrap_or(0)
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        self.free_var_types().into_keys().collect()
    }

    /// Free variables together with their (occurrence-annotated) types.
    pub fn free_var_types(&self) -> BTreeMap<Name, Type> {
        fn walk(t: &Term, acc: &mut BTreeMap<Name, Type>) {
            match t {
                Term::Var(n, ty) => {
                    acc.entry(n.clone()).or_insert_with(|| ty.clone());
                }
                Term::Const(..) | Term::Bound(_) => {}
                Term::Abs(_, body) => walk(body, acc),
                Term::App(f, a) => {
                    walk(f, acc);
                    walk(a, acc);
                }
            }
        }
        let mut acc = BTreeMap::new();
        walk(self, &mut acc);
        acc
    }

    /// A term is closed when it has no free variables (constants allowed).
    pub fn is_closed(&self) -> bool {
        self.free_var_types().is_empty()
    }

    /// Infers the type of a top-level term (no loose bound indices).
    pub fn infer_type(&self) -> Result<Type, TermError> {
        self.infer_under(&mut Vec::new())
    }

    fn infer_under(&self, binders: &mut Vec<Type>) -> Result<Type, TermError> {
        match self {
            Term::Var(_, ty) | Term::Const(_, ty) => Ok(ty.clone()),
            Term::Bound(i) => binders
                .iter()
                .rev()
                .nth(*i)
                .cloned()
                .ok_or(TermError::UnboundIndex(*i)),
            Term::Abs(dom, body) => {
                binders.push(dom.clone());
                let cod = body.infer_under(binders)?;
                binders.pop();
                Ok(Type::arrow(dom.clone(), cod))
            }
            Term::App(f, a) => {
                let fun_ty = f.infer_under(binders)?;
                let arg_ty = a.infer_under(binders)?;
                match fun_ty {
                    Type::Arrow(dom, cod) => {
                        if *dom == arg_ty {
                            Ok(*cod)
                        } else {
                            Err(TermError::ArgumentMismatch {
                                expected: *dom,
                                found: arg_ty,
                            })
                        }
                    }
                    other => Err(TermError::NotAFunction(other)),
                }
            }
        }
    }

    /// Beta-normal eta-long form. Idempotent and type-preserving; fails only
    /// on ill-typed input.
    pub fn normalize(&self) -> Result<Term, TermError> {
        let ty = self.infer_type()?;
        let reduced = beta_reduce(self);
        Ok(eta_expand(&reduced, &ty, &mut Vec::new()))
    }

    /// Simultaneous capture-avoiding replacement of free variables followed
    /// by normalization. Images must be top-level terms of the variables'
    /// types; under that contract the result is always well-typed.
    pub fn replace_free(&self, map: &BTreeMap<Name, Term>) -> Term {
        fn walk(t: &Term, map: &BTreeMap<Name, Term>) -> Term {
            match t {
                // Images have no loose indices, so entering binders needs
                // no shifting.
                Term::Var(n, _) => map.get(n).cloned().unwrap_or_else(|| t.clone()),
                Term::Const(..) | Term::Bound(_) => t.clone(),
                Term::Abs(ty, body) => Term::abs(ty.clone(), walk(body, map)),
                Term::App(f, a) => Term::app(walk(f, map), walk(a, map)),
            }
        }
        walk(self, map)
    }
}

/// Replaces free occurrences of `name` by the bound index `depth`,
/// incrementing under binders.
fn close(t: &Term, name: &Name, depth: usize) -> Term {
    match t {
        Term::Var(n, _) if n == name => Term::Bound(depth),
        Term::Var(..) | Term::Const(..) => t.clone(),
        Term::Bound(i) => Term::Bound(*i),
        Term::Abs(ty, body) => Term::abs(ty.clone(), close(body, name, depth + 1)),
        Term::App(f, a) => Term::app(close(f, name, depth), close(a, name, depth)),
    }
}

/// Adds `by` to every loose index >= cutoff.
fn shift(t: &Term, by: usize, cutoff: usize) -> Term {
    match t {
        Term::Bound(i) if *i >= cutoff => Term::Bound(i + by),
        Term::Var(..) | Term::Const(..) | Term::Bound(_) => t.clone(),
        Term::Abs(ty, body) => Term::abs(ty.clone(), shift(body, by, cutoff + 1)),
        Term::App(f, a) => Term::app(shift(f, by, cutoff), shift(a, by, cutoff)),
    }
}

/// Substitutes `arg` for index `depth` in `t`, adjusting the remaining
/// loose indices downward.
fn subst_bound(t: &Term, depth: usize, arg: &Term) -> Term {
    match t {
        Term::Bound(i) if *i == depth => shift(arg, depth, 0),
        Term::Bound(i) if *i > depth => Term::Bound(i - 1),
        Term::Var(..) | Term::Const(..) | Term::Bound(_) => t.clone(),
        Term::Abs(ty, body) => Term::abs(ty.clone(), subst_bound(body, depth + 1, arg)),
        Term::App(f, a) => Term::app(subst_bound(f, depth, arg), subst_bound(a, depth, arg)),
    }
}

/// Normal-order beta normalization. Terminates on simply typed terms.
fn beta_reduce(t: &Term) -> Term {
    match t {
        Term::App(f, a) => {
            let f = beta_reduce(f);
            if let Term::Abs(_, body) = f {
                beta_reduce(&subst_bound(&body, 0, a))
            } else {
                Term::app(f, beta_reduce(a))
            }
        }
        Term::Abs(ty, body) => Term::abs(ty.clone(), beta_reduce(body)),
        _ => t.clone(),
    }
}

/// Eta-expands a beta-normal term of type `ty` (under `binders`) into
/// eta-long form: every subterm of arrow type becomes an abstraction and
/// every head is fully applied.
fn eta_expand(t: &Term, ty: &Type, binders: &mut Vec<Type>) -> Term {
    match ty {
        Type::Arrow(dom, cod) => match t {
            Term::Abs(bty, body) => {
                debug_assert_eq!(bty, dom.as_ref());
                binders.push(dom.as_ref().clone());
                let body = eta_expand(body, cod, binders);
                binders.pop();
                Term::abs(dom.as_ref().clone(), body)
            }
            _ => {
                // Spine of arrow type: wrap one binder and push it in.
                let widened = Term::app(shift(t, 1, 0), Term::Bound(0));
                binders.push(dom.as_ref().clone());
                let body = eta_expand(&widened, cod, binders);
                binders.pop();
                Term::abs(dom.as_ref().clone(), body)
            }
        },
        Type::Base(_) => {
            let (head, args) = t.spine();
            let head_ty = match head {
                Term::Var(_, ty) | Term::Const(_, ty) => ty.clone(),
                Term::Bound(i) => binders
                    .iter()
                    .rev()
                    .nth(*i)
                    .expect("beta-normal term has bound heads under binders")
                    .clone(),
                _ => unreachable!("beta-normal spine head is atomic"),
            };
            let arg_tys: Vec<Type> = head_ty.argument_types().into_iter().cloned().collect();
            debug_assert_eq!(arg_tys.len(), args.len(), "base-typed spine is fully applied");
            let head = head.clone();
            let args: Vec<Term> = args
                .iter()
                .zip(arg_tys.iter())
                .map(|(a, aty)| eta_expand(a, aty, binders))
                .collect();
            Term::apps(head, args)
        }
    }
}

/// True iff the normal forms of `a` and `b` are alpha-equal. Errors when
/// the two terms do not share a type.
pub fn beta_eta_equal(a: &Term, b: &Term) -> Result<bool, TermError> {
    let ta = a.infer_type()?;
    let tb = b.infer_type()?;
    if ta != tb {
        return Err(TermError::TypeMismatch { left: ta, right: tb });
    }
    Ok(a.normalize()? == b.normalize()?)
}

// ---------------------------------------------------------------------
// Printing. Binder display names are generated deterministically (x1,
// x2, ...), skipping any name already free in the term, so printing is a
// pure function of the alpha-equivalence class. Generated (`#`) free
// variables print with an inline type annotation, which keeps printed
// terms self-contained for reparsing.
// ---------------------------------------------------------------------

struct Printer<'a> {
    binder_names: Vec<String>,
    avoid: BTreeSet<&'a str>,
    next_hint: usize,
}

impl<'a> Printer<'a> {
    fn new(term: &'a Term) -> Printer<'a> {
        fn collect(t: &Term, acc: &mut BTreeSet<&str>) {
            match t {
                Term::Var(n, _) | Term::Const(n, _) => {
                    acc.insert(n.as_str());
                }
                Term::Bound(_) => {}
                Term::Abs(_, body) => collect(body, acc),
                Term::App(f, a) => {
                    collect(f, acc);
                    collect(a, acc);
                }
            }
        }
        let mut avoid = BTreeSet::new();
        collect(term, &mut avoid);
        Printer {
            binder_names: Vec::new(),
            avoid,
            next_hint: 1,
        }
    }

    fn fresh_binder(&mut self) -> String {
        loop {
            let candidate = format!("x{}", self.next_hint);
            self.next_hint += 1;
            if !self.avoid.contains(candidate.as_str())
                && !self.binder_names.iter().any(|n| *n == candidate)
            {
                return candidate;
            }
        }
    }

    fn print(&mut self, t: &Term, out: &mut String, atom_position: bool) {
        match t {
            Term::Var(n, ty) if n.is_generated() => {
                out.push('(');
                out.push_str(n.as_str());
                out.push_str(" : ");
                out.push_str(&ty.to_string());
                out.push(')');
            }
            Term::Var(n, _) | Term::Const(n, _) => out.push_str(n.as_str()),
            Term::Bound(i) => {
                let idx = self.binder_names.len().checked_sub(1 + i);
                match idx {
                    Some(k) => out.push_str(&self.binder_names[k]),
                    None => out.push_str(&format!("?{i}")),
                }
            }
            Term::Abs(ty, body) => {
                let needs_parens = atom_position;
                if needs_parens {
                    out.push('(');
                }
                let name = self.fresh_binder();
                out.push('\\');
                out.push_str(&name);
                out.push(':');
                out.push_str(&ty.to_string());
                out.push_str(". ");
                self.binder_names.push(name);
                self.print(body, out, false);
                self.binder_names.pop();
                if needs_parens {
                    out.push(')');
                }
            }
            Term::App(..) => {
                if atom_position {
                    out.push('(');
                }
                let (head, args) = t.spine();
                self.print(head, out, true);
                for arg in args {
                    out.push(' ');
                    self.print(arg, out, true);
                }
                if atom_position {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        Printer::new(self).print(self, &mut out, false);
        f.write_str(&out)
    }
}
