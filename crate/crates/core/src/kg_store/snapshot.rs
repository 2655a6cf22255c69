use std::collections::{BTreeSet, HashSet};

use super::triple::{Triple, TripleSet};
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

/// Train/valid/test triples for one snapshot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: TripleSet,
    pub valid: TripleSet,
    pub test: TripleSet,
}

/// Cumulative state of the graph at one time step.
///
/// `train` holds every training triple up to and including this snapshot;
/// `valid` and `test` hold only this snapshot's own evaluation triples.
/// `entities` / `relations` are the embedded vocabularies `E_i`, `R_i`,
/// i.e. everything that occurs in a training triple so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Snapshot {
    pub train: TripleSet,
    pub valid: TripleSet,
    pub test: TripleSet,
    pub entities: BTreeSet<usize>,
    pub relations: BTreeSet<usize>,
}

impl Snapshot {
    pub fn from_cumulative(train: TripleSet, valid: TripleSet, test: TripleSet) -> Self {
        let mut entities = BTreeSet::new();
        let mut relations = BTreeSet::new();
        for t in &train {
            entities.insert(t.head);
            entities.insert(t.tail);
            relations.insert(t.relation);
        }
        Snapshot {
            train,
            valid,
            test,
            entities,
            relations,
        }
    }
}

/// What snapshot `i` adds on top of snapshot `i - 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Delta {
    pub new_triples: TripleSet,
    /// Sorted ascending.
    pub new_entities: Vec<usize>,
    /// Sorted ascending.
    pub new_relations: Vec<usize>,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.new_triples.is_empty() && self.new_entities.is_empty() && self.new_relations.is_empty()
    }

    /// Every new entity must occur in at least one new triple.
    pub fn check_coverage(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for t in &self.new_triples {
            seen.insert(t.head);
            seen.insert(t.tail);
        }
        match self.new_entities.iter().find(|e| !seen.contains(e)) {
            Some(e) => Err(Error::Validation(format!(
                "new entity {e} does not occur in any new triple"
            ))),
            None => Ok(()),
        }
    }
}

/// Set differences between consecutive cumulative snapshots.
pub fn compute_delta(prev: &Snapshot, curr: &Snapshot) -> Result<Delta> {
    let curr_set = curr.train.to_hash_set();
    if let Some(missing) = prev.train.iter().find(|t| !curr_set.contains(t)) {
        return Err(Error::Validation(format!(
            "triple {missing} of the previous snapshot is missing from the current one"
        )));
    }
    if let Some(e) = prev.entities.difference(&curr.entities).next() {
        return Err(Error::Validation(format!(
            "entity {e} of the previous snapshot is missing from the current one"
        )));
    }
    if let Some(r) = prev.relations.difference(&curr.relations).next() {
        return Err(Error::Validation(format!(
            "relation {r} of the previous snapshot is missing from the current one"
        )));
    }
    let prev_set = prev.train.to_hash_set();
    let mut new_triples: TripleSet = curr
        .train
        .iter()
        .filter(|t| !prev_set.contains(t))
        .copied()
        .collect();
    new_triples.dedup_stable();
    Ok(Delta {
        new_triples,
        new_entities: curr.entities.difference(&prev.entities).copied().collect(),
        new_relations: curr.relations.difference(&prev.relations).copied().collect(),
    })
}

/// A growing knowledge graph: snapshot 0 is the base, 1..=N the increments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SnapshotSequence {
    pub vocab: Vocabulary,
    pub snapshots: Vec<Snapshot>,
}

impl SnapshotSequence {
    /// Build from per-snapshot delta splits (the on-disk representation),
    /// accumulating training triples.
    pub fn from_deltas(vocab: Vocabulary, deltas: Vec<Splits>) -> Self {
        let mut snapshots = Vec::with_capacity(deltas.len());
        let mut acc = TripleSet::new();
        for split in deltas {
            acc.extend(split.train.iter().copied());
            acc.dedup_stable();
            snapshots.push(Snapshot::from_cumulative(acc.clone(), split.valid, split.test));
        }
        SnapshotSequence { vocab, snapshots }
    }

    /// Build from splits whose train sets are already cumulative. No
    /// consistency is enforced; run [`validate_sequence`] on the result.
    pub fn from_cumulative(vocab: Vocabulary, cumulative: Vec<Splits>) -> Self {
        let snapshots = cumulative
            .into_iter()
            .map(|s| Snapshot::from_cumulative(s.train, s.valid, s.test))
            .collect();
        SnapshotSequence { vocab, snapshots }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Number of incremental snapshots `N` (all but the base).
    pub fn num_increments(&self) -> usize {
        self.snapshots.len().saturating_sub(1)
    }

    pub fn snapshot(&self, i: usize) -> &Snapshot {
        &self.snapshots[i]
    }

    /// `Delta_i` for `i >= 1`; for `i = 0` everything in the base is new.
    pub fn delta(&self, i: usize) -> Result<Delta> {
        if i == 0 {
            return compute_delta(&Snapshot::default(), &self.snapshots[0]);
        }
        compute_delta(&self.snapshots[i - 1], &self.snapshots[i])
    }

    /// All train/valid/test triples of snapshots `0..=i`: the filter set for
    /// ranking after training with snapshot `i`.
    pub fn known_triples(&self, i: usize) -> HashSet<Triple> {
        let mut known = HashSet::new();
        for s in &self.snapshots[..=i] {
            known.extend(s.train.iter().copied());
            known.extend(s.valid.iter().copied());
            known.extend(s.test.iter().copied());
        }
        known
    }
}

/// One finding of [`validate_sequence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    EmptySnapshot { snapshot: usize },
    MissingTriple { snapshot: usize, triple: Triple },
    MissingEntity { snapshot: usize, entity: usize },
    MissingRelation { snapshot: usize, relation: usize },
    /// A test triple also present in a training split.
    Leakage { triple: Triple, test_snapshot: usize, train_snapshot: usize },
    /// Embedded ids of a snapshot are not the dense range `0..|E_i|`, so
    /// embedding rows could not be indexed by id.
    NonContiguousIds { snapshot: usize },
    /// A test triple whose reverse `(t, *, h)` is a training triple.
    /// Informational only.
    InverseDuplicate { triple: Triple, test_snapshot: usize },
    /// Evaluation triples mentioning an entity with no embedding at that
    /// snapshot. Informational only; such queries are skipped.
    UnembeddedEvalEntities { snapshot: usize, count: usize },
}

impl Issue {
    pub fn is_violation(&self) -> bool {
        !matches!(
            self,
            Issue::InverseDuplicate { .. } | Issue::UnembeddedEvalEntities { .. }
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn violations(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.is_violation())
    }

    pub fn num_violations(&self) -> usize {
        self.violations().count()
    }
}

fn is_dense(ids: &BTreeSet<usize>) -> bool {
    ids.iter().next_back().is_none_or(|&max| max + 1 == ids.len())
}

/// Report inclusion violations, empty snapshots and test/train leakage.
pub fn validate_sequence(seq: &SnapshotSequence) -> ValidationReport {
    let mut issues = Vec::new();
    if seq.snapshots.is_empty() {
        issues.push(Issue::EmptySnapshot { snapshot: 0 });
        return ValidationReport { issues };
    }

    for (i, snap) in seq.snapshots.iter().enumerate() {
        if i == 0 {
            if snap.train.is_empty() {
                issues.push(Issue::EmptySnapshot { snapshot: 0 });
            }
        } else {
            let prev = &seq.snapshots[i - 1];
            let curr_set = snap.train.to_hash_set();
            for t in prev.train.iter().filter(|t| !curr_set.contains(t)) {
                issues.push(Issue::MissingTriple {
                    snapshot: i,
                    triple: *t,
                });
            }
            for &e in prev.entities.difference(&snap.entities) {
                issues.push(Issue::MissingEntity {
                    snapshot: i,
                    entity: e,
                });
            }
            for &r in prev.relations.difference(&snap.relations) {
                issues.push(Issue::MissingRelation {
                    snapshot: i,
                    relation: r,
                });
            }
            let prev_set = prev.train.to_hash_set();
            if snap.train.iter().all(|t| prev_set.contains(t)) {
                issues.push(Issue::EmptySnapshot { snapshot: i });
            }
        }
        if !is_dense(&snap.entities) || !is_dense(&snap.relations) {
            issues.push(Issue::NonContiguousIds { snapshot: i });
        }
    }

    // Leakage: the first training split that contains each test triple.
    let mut first_train: std::collections::HashMap<Triple, usize> = Default::default();
    for (j, snap) in seq.snapshots.iter().enumerate() {
        for t in &snap.train {
            first_train.entry(*t).or_insert(j);
        }
    }
    let mut reverse_pairs: HashSet<(usize, usize)> = HashSet::new();
    for t in first_train.keys() {
        reverse_pairs.insert((t.head, t.tail));
    }
    for (i, snap) in seq.snapshots.iter().enumerate() {
        for t in &snap.test {
            if let Some(&j) = first_train.get(t) {
                issues.push(Issue::Leakage {
                    triple: *t,
                    test_snapshot: i,
                    train_snapshot: j,
                });
            }
            if reverse_pairs.contains(&(t.tail, t.head)) {
                issues.push(Issue::InverseDuplicate {
                    triple: *t,
                    test_snapshot: i,
                });
            }
        }
        let unembedded = snap
            .valid
            .iter()
            .chain(snap.test.iter())
            .filter(|t| !snap.entities.contains(&t.head) || !snap.entities.contains(&t.tail))
            .count();
        if unembedded > 0 {
            issues.push(Issue::UnembeddedEvalEntities {
                snapshot: i,
                count: unembedded,
            });
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[(usize, usize, usize)]) -> TripleSet {
        v.iter().map(|&t| Triple::from(t)).collect()
    }

    fn snap(train: &[(usize, usize, usize)]) -> Snapshot {
        Snapshot::from_cumulative(ts(train), TripleSet::new(), TripleSet::new())
    }

    #[test]
    fn delta_with_one_new_entity() {
        // a=0 b=1 c=2 d=3, r=0
        let prev = snap(&[(0, 0, 1), (1, 0, 2)]);
        let curr = snap(&[(0, 0, 1), (1, 0, 2), (3, 0, 0)]);
        let d = compute_delta(&prev, &curr).unwrap();
        assert_eq!(d.new_entities, vec![3]);
        assert_eq!(&*d.new_triples, &[Triple::new(3, 0, 0)]);
        assert!(d.new_relations.is_empty());
        d.check_coverage().unwrap();
    }

    #[test]
    fn identical_snapshots_give_empty_delta() {
        let s = snap(&[(0, 0, 1), (1, 0, 2)]);
        let d = compute_delta(&s, &s.clone()).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn inclusion_violation_is_an_error() {
        let prev = snap(&[(0, 0, 1), (1, 0, 2)]);
        let curr = snap(&[(0, 0, 1), (2, 0, 3)]);
        assert!(matches!(compute_delta(&prev, &curr), Err(Error::Validation(_))));
    }

    #[test]
    fn compute_delta_is_idempotent() {
        let prev = snap(&[(0, 0, 1)]);
        let curr = snap(&[(0, 0, 1), (1, 1, 2), (2, 0, 0)]);
        assert_eq!(compute_delta(&prev, &curr).unwrap(), compute_delta(&prev, &curr).unwrap());
    }

    #[test]
    fn uncovered_new_entity_fails_coverage() {
        let d = Delta {
            new_triples: ts(&[(0, 0, 1)]),
            new_entities: vec![1, 5],
            new_relations: vec![],
        };
        assert!(d.check_coverage().is_err());
    }

    #[test]
    fn leakage_is_reported_with_the_triple() {
        let seq = SnapshotSequence::from_deltas(
            Vocabulary::new(),
            vec![Splits {
                train: ts(&[(0, 0, 1), (1, 0, 2)]),
                valid: TripleSet::new(),
                test: ts(&[(1, 0, 2)]),
            }],
        );
        let report = validate_sequence(&seq);
        assert!(!report.is_ok());
        assert!(report.issues.contains(&Issue::Leakage {
            triple: Triple::new(1, 0, 2),
            test_snapshot: 0,
            train_snapshot: 0
        }));
    }

    #[test]
    fn missing_entity_in_non_cumulative_input() {
        let seq = SnapshotSequence::from_cumulative(
            Vocabulary::new(),
            vec![
                Splits { train: ts(&[(0, 0, 1)]), ..Default::default() },
                Splits { train: ts(&[(0, 0, 1), (1, 0, 2)]), ..Default::default() },
                // entity 2 (and its triple) dropped
                Splits { train: ts(&[(0, 0, 1), (1, 0, 3)]), ..Default::default() },
            ],
        );
        let report = validate_sequence(&seq);
        assert!(report.issues.contains(&Issue::MissingEntity { snapshot: 2, entity: 2 }));
        assert!(report
            .issues
            .contains(&Issue::MissingTriple { snapshot: 2, triple: Triple::new(1, 0, 2) }));
    }

    #[test]
    fn empty_base_is_reported() {
        let seq = SnapshotSequence::from_deltas(Vocabulary::new(), vec![Splits::default()]);
        assert!(validate_sequence(&seq).issues.contains(&Issue::EmptySnapshot { snapshot: 0 }));
    }
}
