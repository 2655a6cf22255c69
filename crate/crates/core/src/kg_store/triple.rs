use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;

/// An integer-encoded `(head, relation, tail)` fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
}

impl Triple {
    pub const fn new(head: usize, relation: usize, tail: usize) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

impl From<(usize, usize, usize)> for Triple {
    fn from((h, r, t): (usize, usize, usize)) -> Self {
        Triple::new(h, r, t)
    }
}

/// Ordered collection of triples. Order is the load order and is what
/// training iterates over before shuffling.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleSet(Vec<Triple>);

impl TripleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: Triple) {
        self.0.push(t);
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = Triple>) {
        self.0.extend(other);
    }

    pub fn to_hash_set(&self) -> HashSet<Triple> {
        self.0.iter().copied().collect()
    }

    /// Drop repeated triples, keeping first occurrences.
    pub fn dedup_stable(&mut self) {
        let mut seen = HashSet::with_capacity(self.0.len());
        self.0.retain(|t| seen.insert(*t));
    }

    pub fn into_vec(self) -> Vec<Triple> {
        self.0
    }
}

impl Deref for TripleSet {
    type Target = [Triple];

    fn deref(&self) -> &[Triple] {
        &self.0
    }
}

impl From<Vec<Triple>> for TripleSet {
    fn from(v: Vec<Triple>) -> Self {
        TripleSet(v)
    }
}

impl FromIterator<Triple> for TripleSet {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        TripleSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a TripleSet {
    type Item = &'a Triple;
    type IntoIter = std::slice::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
