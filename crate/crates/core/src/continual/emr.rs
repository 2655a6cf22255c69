use rand::seq::index;

use crate::kg_store::{Triple, TripleSet};
use crate::rng::Rng;

/// Uniform sample without replacement of `min(memory, |old_train|)` old
/// training triples.
pub fn emr_replay(old_train: &[Triple], memory: usize, rng: &mut Rng) -> TripleSet {
    let m = memory.min(old_train.len());
    if m == 0 {
        return TripleSet::new();
    }
    if m == old_train.len() {
        return old_train.iter().copied().collect();
    }
    index::sample(rng, old_train.len(), m)
        .into_iter()
        .map(|i| old_train[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::collections::HashSet;

    fn triples(n: usize) -> Vec<Triple> {
        (0..n).map(|i| Triple::new(i, 0, i + 1)).collect()
    }

    #[test]
    fn zero_memory_is_empty() {
        assert!(emr_replay(&triples(10), 0, &mut seeded(1)).is_empty());
    }

    #[test]
    fn memory_clamps_to_full_set() {
        let t = triples(10);
        assert_eq!(&*emr_replay(&t, 50, &mut seeded(1)), &t[..]);
    }

    #[test]
    fn fixed_seed_same_sample_without_replacement() {
        let t = triples(10);
        let a = emr_replay(&t, 3, &mut seeded(4));
        let b = emr_replay(&t, 3, &mut seeded(4));
        assert_eq!(a, b);
        assert_eq!(a.to_hash_set().len(), 3);
        let all: HashSet<_> = t.iter().copied().collect();
        assert!(a.iter().all(|x| all.contains(x)));
    }
}
