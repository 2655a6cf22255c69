use rayon::prelude::*;

use super::ranking::{rank_query, FilterIndex, Slot};
use crate::kg_store::Triple;
use crate::models::{EmbeddingState, Model};

/// Link-prediction metrics over a set of queries.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Metrics {
    pub mrr: f64,
    pub hits_at_1: f64,
    pub hits_at_3: f64,
    pub hits_at_10: f64,
    /// Ranked queries (two per evaluable triple).
    pub queries: usize,
    /// Queries skipped because an entity or relation has no embedding.
    pub skipped: usize,
}

impl Metrics {
    pub fn from_ranks(ranks: &[f64]) -> Self {
        let n = ranks.len();
        if n == 0 {
            return Metrics::default();
        }
        let frac = |k: f64| ranks.iter().filter(|&&r| r <= k).count() as f64 / n as f64;
        Metrics {
            mrr: ranks.iter().map(|r| 1.0 / r).sum::<f64>() / n as f64,
            hits_at_1: frac(1.0),
            hits_at_3: frac(3.0),
            hits_at_10: frac(10.0),
            queries: n,
            skipped: 0,
        }
    }

    /// Query-count weighted combination (micro average).
    pub fn merge(parts: &[Metrics]) -> Metrics {
        let n: usize = parts.iter().map(|m| m.queries).sum();
        let skipped = parts.iter().map(|m| m.skipped).sum();
        if n == 0 {
            return Metrics {
                skipped,
                ..Metrics::default()
            };
        }
        let w = |f: fn(&Metrics) -> f64| {
            parts.iter().map(|m| f(m) * m.queries as f64).sum::<f64>() / n as f64
        };
        Metrics {
            mrr: w(|m| m.mrr),
            hits_at_1: w(|m| m.hits_at_1),
            hits_at_3: w(|m| m.hits_at_3),
            hits_at_10: w(|m| m.hits_at_10),
            queries: n,
            skipped,
        }
    }
}

/// Ranks of both the head and the tail query of every evaluable triple,
/// in input order (tail query first). Skipped queries are counted.
pub fn split_ranks(
    model: &Model,
    state: &EmbeddingState,
    test: &[Triple],
    filter: Option<&FilterIndex>,
    parallel: bool,
) -> (Vec<f64>, usize) {
    let ne = state.num_entities();
    let nr = state.num_relations();
    let usable: Vec<&Triple> = test
        .iter()
        .filter(|t| t.head < ne && t.tail < ne && t.relation < nr)
        .collect();
    let skipped = 2 * (test.len() - usable.len());
    let rank_pair = |t: &&Triple| {
        [
            rank_query(model, state, t, Slot::Tail, filter),
            rank_query(model, state, t, Slot::Head, filter),
        ]
    };
    let pairs: Vec<[f64; 2]> = if parallel {
        usable.par_iter().map(rank_pair).collect()
    } else {
        usable.iter().map(rank_pair).collect()
    };
    (pairs.into_iter().flatten().collect(), skipped)
}

/// MRR and Hits@{1,3,10} over both query directions of every triple.
pub fn evaluate_split(
    model: &Model,
    state: &EmbeddingState,
    test: &[Triple],
    filter: Option<&FilterIndex>,
    parallel: bool,
) -> Metrics {
    let (ranks, skipped) = split_ranks(model, state, test, filter, parallel);
    Metrics {
        skipped,
        ..Metrics::from_ranks(&ranks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_one_two_four() {
        let m = Metrics::from_ranks(&[1.0, 2.0, 4.0]);
        assert!((m.mrr - 1.75 / 3.0).abs() < 1e-15);
        assert!((m.hits_at_3 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.hits_at_1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.hits_at_10, 1.0);
    }

    #[test]
    fn all_first() {
        let m = Metrics::from_ranks(&[1.0; 7]);
        assert_eq!((m.mrr, m.hits_at_3), (1.0, 1.0));
    }

    #[test]
    fn merge_weights_by_query_count() {
        let a = Metrics::from_ranks(&[1.0, 1.0, 1.0]);
        let b = Metrics::from_ranks(&[2.0]);
        let m = Metrics::merge(&[a, b]);
        assert!((m.mrr - 3.5 / 4.0).abs() < 1e-15);
        assert_eq!(m.queries, 4);
    }
}
