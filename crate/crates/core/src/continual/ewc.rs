//! Elastic weight consolidation with a diagonal Fisher estimate.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index;

use crate::error::{Error, Result};
use crate::kg_store::Triple;
use crate::models::{negative_sample, EmbeddingState, Gradients, Model, Pair, SamplerStats, DEFAULT_MAX_RETRIES};
use crate::rng::Rng;

/// Quadratic penalty anchoring the parameters that existed before an
/// increment:
///
/// `(λ/2) Σ_p F_p (θ_p - θ*_p)²`
///
/// Rows beyond the anchor (entities or relations added later) are free.
#[derive(Debug, Clone)]
pub struct EwcPenalty {
    anchor: EmbeddingState,
    fisher: EmbeddingState,
    pub lambda: f64,
}

impl EwcPenalty {
    pub fn new(anchor: EmbeddingState, fisher: EmbeddingState, lambda: f64) -> Result<Self> {
        let shape = |s: &EmbeddingState| {
            (s.num_entities(), s.num_relations(), s.dim(), s.aux.is_some())
        };
        if shape(&anchor) != shape(&fisher) {
            return Err(Error::contract("fisher and anchor shapes differ"));
        }
        if fisher.blocks().iter().any(|b| b.as_slice().iter().any(|f| f.is_nan() || *f < 0.0)) {
            return Err(Error::contract("fisher values must be non-negative"));
        }
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Error::contract("ewc lambda must be non-negative"));
        }
        Ok(EwcPenalty {
            anchor,
            fisher,
            lambda,
        })
    }

    /// Penalty value; if `grads` is given, `λ F (θ - θ*)` is added to it.
    pub fn apply(&self, state: &EmbeddingState, grads: Option<&mut Gradients>) -> f64 {
        let mut total = 0.0;
        let anchor_blocks = self.anchor.blocks();
        let fisher_blocks = self.fisher.blocks();
        let state_blocks = state.blocks();
        let mut grad_blocks = grads.map(|g| g.blocks_mut());
        for b in 0..anchor_blocks.len() {
            let n = anchor_blocks[b].as_slice().len();
            let theta = &state_blocks[b].as_slice()[..n];
            let star = anchor_blocks[b].as_slice();
            let f = fisher_blocks[b].as_slice();
            for i in 0..n {
                let diff = theta[i] - star[i];
                total += f[i] * diff * diff;
            }
            if let Some(gb) = grad_blocks.as_mut() {
                let g = &mut gb[b].as_mut_slice()[..n];
                for i in 0..n {
                    g[i] += self.lambda * f[i] * (theta[i] - star[i]);
                }
            }
        }
        0.5 * self.lambda * total
    }
}

/// Penalty and its gradient (shaped like `state`) in one call.
pub fn ewc_penalty(
    state: &EmbeddingState,
    anchor: &EmbeddingState,
    fisher: &EmbeddingState,
    lambda: f64,
) -> Result<(f64, Gradients)> {
    let penalty = EwcPenalty::new(anchor.clone(), fisher.clone(), lambda)?;
    let mut grads = Gradients::zeros_like(state);
    let value = penalty.apply(state, Some(&mut grads));
    Ok((value, grads))
}

/// Diagonal Fisher: mean over `pairs` of the squared per-parameter gradient
/// of each positive's loss `1/k Σ_neg max(0, margin - s(pos) + s(neg))`.
pub fn fisher_from_pairs(model: &Model, state: &EmbeddingState, pairs: &[Pair], margin: f64) -> EmbeddingState {
    let mut fisher = EmbeddingState::zeros_like(state);
    if pairs.is_empty() {
        return fisher;
    }
    let dim = state.dim();
    for (pos, negs) in pairs {
        let k = negs.len().max(1) as f64;
        // (block, row) -> gradient row for this sample
        let mut sample: BTreeMap<(u8, usize), Vec<f64>> = BTreeMap::new();
        let mut add = |t: &Triple, coeff: f64| {
            let g = model.score_gradients(state, t);
            let mut put = |key: (u8, usize), v: &[f64]| {
                let row = sample.entry(key).or_insert_with(|| vec![0.0; dim]);
                for (r, x) in row.iter_mut().zip(v) {
                    *r += coeff * x;
                }
            };
            put((0, t.head), &g.head);
            put((0, t.tail), &g.tail);
            put((1, t.relation), &g.relation);
            if let Some(ga) = &g.aux {
                put((2, t.relation), ga);
            }
        };
        let pos_score = model.score(state, pos);
        let mut active = 0usize;
        for neg in negs {
            if margin - pos_score + model.score(state, neg) > 0.0 {
                add(neg, 1.0 / k);
                active += 1;
            }
        }
        if active > 0 {
            add(pos, -(active as f64) / k);
        }
        for ((block, row), g) in sample {
            let target = match block {
                0 => fisher.entities.row_mut(row),
                1 => fisher.relations.row_mut(row),
                _ => fisher.aux.as_mut().expect("aux gradient implies aux block").row_mut(row),
            };
            for (f, x) in target.iter_mut().zip(&g) {
                *f += x * x;
            }
        }
    }
    let n = pairs.len() as f64;
    for b in fisher.blocks_mut() {
        b.as_mut_slice().iter_mut().for_each(|f| *f /= n);
    }
    fisher
}

/// Sample `min(sample_size, |old|)` old triples without replacement, draw
/// `k` corruptions each, and compute [`fisher_from_pairs`].
#[allow(clippy::too_many_arguments)]
pub fn estimate_fisher(
    model: &Model,
    state: &EmbeddingState,
    old_triples: &[Triple],
    sample_size: usize,
    k: usize,
    margin: f64,
    known: &HashSet<Triple>,
    rng: &mut Rng,
) -> Result<EmbeddingState> {
    if sample_size == 0 {
        return Err(Error::contract("fisher sample size must be at least 1"));
    }
    let m = sample_size.min(old_triples.len());
    let picked: Vec<Triple> = if m == old_triples.len() {
        old_triples.to_vec()
    } else {
        index::sample(rng, old_triples.len(), m).into_iter().map(|i| old_triples[i]).collect()
    };
    let mut stats = SamplerStats::default();
    let pairs: Vec<Pair> = picked
        .iter()
        .map(|t| (*t, negative_sample(t, k, state.num_entities(), known, DEFAULT_MAX_RETRIES, rng, &mut stats)))
        .collect();
    Ok(fisher_from_pairs(model, state, &pairs, margin))
}
