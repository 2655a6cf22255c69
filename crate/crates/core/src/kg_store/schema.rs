use std::collections::BTreeSet;

use super::vocab::Interner;

pub type ClassId = usize;

/// Entity -> class memberships. Entities without a known type have an empty
/// class set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    membership: Vec<BTreeSet<ClassId>>,
    pub classes: Interner,
    /// Lines skipped at load time because the entity token was unknown.
    pub skipped: usize,
}

static EMPTY: BTreeSet<ClassId> = BTreeSet::new();

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `class` (by name) to the class set of `entity`.
    pub fn assign(&mut self, entity: usize, class: &str) -> ClassId {
        let class_id = self.classes.intern(class);
        self.assign_id(entity, class_id);
        class_id
    }

    pub fn assign_id(&mut self, entity: usize, class: ClassId) {
        if self.membership.len() <= entity {
            self.membership.resize_with(entity + 1, BTreeSet::new);
        }
        self.membership[entity].insert(class);
    }

    pub fn classes_of(&self, entity: usize) -> &BTreeSet<ClassId> {
        self.membership.get(entity).unwrap_or(&EMPTY)
    }

    pub fn class_name(&self, class: ClassId) -> Option<&str> {
        self.classes.token(class)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Iterate `(entity, class)` pairs in entity order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, ClassId)> + '_ {
        self.membership
            .iter()
            .enumerate()
            .flat_map(|(e, cs)| cs.iter().map(move |&c| (e, c)))
    }
}
