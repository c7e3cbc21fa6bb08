//! Generation of `#`-prefixed fresh names.
//!
//! The input grammar rejects `#` in identifiers, so generated names can
//! never collide with user symbols. One `FreshNames` instance is scoped to
//! a single solver run; the contract is uniqueness of issued names.

use std::collections::{BTreeMap, BTreeSet};

use crate::term::Name;

#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    taken: BTreeSet<Name>,
    counters: BTreeMap<String, usize>,
}

impl FreshNames {
    pub fn new() -> FreshNames {
        FreshNames::default()
    }

    /// Starts a source that will never issue any of `existing`.
    pub fn avoiding(existing: impl IntoIterator<Item = Name>) -> FreshNames {
        FreshNames {
            taken: existing.into_iter().collect(),
            counters: BTreeMap::new(),
        }
    }

    pub fn note_taken(&mut self, name: Name) {
        self.taken.insert(name);
    }

    /// Issues `#<stem><k>` for the smallest unused k, e.g. `#x3`, `#h7`.
    pub fn fresh(&mut self, stem: &str) -> Name {
        let prefix = format!("#{stem}");
        self.fresh_with_prefix(&prefix)
    }

    /// Issues a per-occurrence copy name for `original`, e.g. `#F_1`.
    pub fn fresh_copy(&mut self, original: &Name) -> Name {
        let prefix = format!("#{original}_");
        self.fresh_with_prefix(&prefix)
    }

    fn fresh_with_prefix(&mut self, prefix: &str) -> Name {
        let counter = self.counters.entry(prefix.to_string()).or_insert(0);
        loop {
            *counter += 1;
            let name = Name::new(format!("{prefix}{counter}"));
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}
