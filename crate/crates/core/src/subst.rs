//! Type-preserving finite maps from variables to terms.

use std::collections::btree_map;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::term::{Name, Term, TermError, Type};

/// A parallel substitution. Every binding is checked at insertion time:
/// the image must be a well-typed top-level term of the variable's type,
/// so applying a substitution can never produce an ill-typed term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Name, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    /// Binds `var := image`, normalizing the image. Fails when the image
    /// does not have the declared type.
    pub fn insert(&mut self, var: impl Into<Name>, ty: &Type, image: Term) -> Result<(), TermError> {
        let found = image.infer_type()?;
        if &found != ty {
            return Err(TermError::TypeMismatch {
                left: ty.clone(),
                right: found,
            });
        }
        self.map.insert(var.into(), image.normalize()?);
        Ok(())
    }

    /// Single-binding constructor.
    pub fn bind(var: impl Into<Name>, ty: &Type, image: Term) -> Result<Substitution, TermError> {
        let mut s = Substitution::new();
        s.insert(var, ty, image)?;
        Ok(s)
    }

    pub fn get(&self, var: &Name) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn contains(&self, var: &Name) -> bool {
        self.map.contains_key(var)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn domain(&self) -> BTreeSet<Name> {
        self.map.keys().cloned().collect()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Name, Term> {
        self.map.iter()
    }

    /// Capture-avoiding application followed by normalization. The term
    /// must be well-typed; bindings are type-preserving by construction.
    pub fn apply(&self, t: &Term) -> Term {
        t.replace_free(&self.map)
            .normalize()
            .expect("substitution preserves typing")
    }

    /// `compose(outer, inner)` behaves as `outer` after `inner`:
    /// applying it equals applying `inner` first, then `outer`.
    pub fn compose(outer: &Substitution, inner: &Substitution) -> Substitution {
        let mut map = BTreeMap::new();
        for (x, t) in &inner.map {
            map.insert(x.clone(), outer.apply(t));
        }
        for (x, t) in &outer.map {
            map.entry(x.clone()).or_insert_with(|| t.clone());
        }
        Substitution { map }
    }

    /// Restriction of the domain to `vars`.
    pub fn restricted(&self, vars: &BTreeSet<Name>) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| vars.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, t)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x} := {t}")?;
        }
        write!(f, "}}")
    }
}
