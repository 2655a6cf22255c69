use std::collections::{HashMap, HashSet};

use crate::kg_store::Triple;
use crate::models::{EmbeddingState, Model};

/// Which slot of a triple is being predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    /// `(?, r, t)`
    Head,
    /// `(h, r, ?)`
    Tail,
}

/// Known true triples indexed for the filtered ranking protocol.
#[derive(Debug, Clone, Default)]
pub struct FilterIndex {
    tails: HashMap<(usize, usize), HashSet<usize>>,
    heads: HashMap<(usize, usize), HashSet<usize>>,
}

impl FilterIndex {
    pub fn new<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut idx = FilterIndex::default();
        for t in triples {
            idx.tails.entry((t.head, t.relation)).or_default().insert(t.tail);
            idx.heads.entry((t.relation, t.tail)).or_default().insert(t.head);
        }
        idx
    }

    /// Entities that complete the query into a known triple.
    pub fn answers(&self, query: &Triple, slot: Slot) -> Option<&HashSet<usize>> {
        match slot {
            Slot::Tail => self.tails.get(&(query.head, query.relation)),
            Slot::Head => self.heads.get(&(query.relation, query.tail)),
        }
    }
}

/// Rank of `gold` among `scores` (higher is better), ignoring candidates
/// for which `excluded` holds. Ties count half: a block of `m` other
/// candidates tied with the gold adds `m / 2`, which is the mean rank over
/// the tied block.
pub fn rank_from_scores(scores: &[f64], gold: usize, excluded: impl Fn(usize) -> bool) -> f64 {
    let g = scores[gold];
    let mut better = 0usize;
    let mut tied = 0usize;
    for (c, &s) in scores.iter().enumerate() {
        if c == gold || excluded(c) {
            continue;
        }
        if s > g || (g.is_nan() && !s.is_nan()) {
            better += 1;
        } else if s == g {
            tied += 1;
        }
    }
    1.0 + better as f64 + tied as f64 / 2.0
}

/// Scores of every embedded entity placed in `slot` of `query`.
pub fn candidate_scores(model: &Model, state: &EmbeddingState, query: &Triple, slot: Slot) -> Vec<f64> {
    let r = state.relation(query.relation);
    let w = state.aux_row(query.relation);
    (0..state.num_entities())
        .map(|c| match slot {
            Slot::Tail => model.score_vectors(state.entity(query.head), r, state.entity(c), w),
            Slot::Head => model.score_vectors(state.entity(c), r, state.entity(query.tail), w),
        })
        .collect()
}

/// Rank of the true entity in `slot` of `query`, filtered when `filter` is
/// given (other candidates forming known triples are excluded).
pub fn rank_query(
    model: &Model,
    state: &EmbeddingState,
    query: &Triple,
    slot: Slot,
    filter: Option<&FilterIndex>,
) -> f64 {
    let scores = candidate_scores(model, state, query, slot);
    let gold = match slot {
        Slot::Head => query.head,
        Slot::Tail => query.tail,
    };
    match filter.and_then(|f| f.answers(query, slot)) {
        Some(known) => rank_from_scores(&scores, gold, |c| known.contains(&c)),
        None => rank_from_scores(&scores, gold, |_| false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictly_highest_is_rank_one() {
        assert_eq!(rank_from_scores(&[0.1, 0.9, 0.5], 1, |_| false), 1.0);
    }

    #[test]
    fn tie_at_top_is_one_and_a_half() {
        assert_eq!(rank_from_scores(&[0.9, 0.9, 0.5], 1, |_| false), 1.5);
    }

    #[test]
    fn filtering_removes_better_candidates() {
        let s = [0.9, 0.8, 0.7];
        assert_eq!(rank_from_scores(&s, 2, |_| false), 3.0);
        assert_eq!(rank_from_scores(&s, 2, |c| c == 0), 2.0);
    }

    #[test]
    fn monotone_transform_preserves_rank() {
        let s = [0.3, -1.2, 0.3, 2.0, 0.0];
        let t: Vec<f64> = s.iter().map(|x| 2.0 * x + 7.0).collect();
        for gold in 0..s.len() {
            assert_eq!(rank_from_scores(&s, gold, |_| false), rank_from_scores(&t, gold, |_| false));
        }
    }
}
