use std::collections::HashSet;

use rayon::prelude::*;

use super::sampling::{negative_sample, SamplerStats};
use super::scoring::ScoreGradients;
use super::{EmbeddingState, Gradients, Model};
use crate::kg_store::Triple;
use crate::rng::Rng;

/// A positive triple and its corruptions.
pub type Pair = (Triple, Vec<Triple>);

/// Add `coeff * ∂score/∂θ` for triple `t` into `grads`.
pub fn accumulate(grads: &mut Gradients, t: &Triple, g: &ScoreGradients, coeff: f64) {
    let add = |dst: &mut [f64], src: &[f64]| {
        for (d, s) in dst.iter_mut().zip(src) {
            *d += coeff * s;
        }
    };
    add(grads.entities.row_mut(t.head), &g.head);
    add(grads.relations.row_mut(t.relation), &g.relation);
    add(grads.entities.row_mut(t.tail), &g.tail);
    if let (Some(aux), Some(ga)) = (&mut grads.aux, &g.aux) {
        add(aux.row_mut(t.relation), ga);
    }
}

struct Contribution {
    loss: f64,
    terms: Vec<(Triple, ScoreGradients, f64)>,
}

fn pair_contribution(model: &Model, state: &EmbeddingState, pair: &Pair, margin: f64, want_grad: bool) -> Contribution {
    let (pos, negs) = pair;
    let pos_score = model.score(state, pos);
    let mut loss = 0.0;
    let mut terms = Vec::new();
    let mut active = 0usize;
    for neg in negs {
        let neg_score = model.score(state, neg);
        let h = margin - pos_score + neg_score;
        if h > 0.0 {
            loss += h;
            active += 1;
            if want_grad {
                terms.push((*neg, model.score_gradients(state, neg), 1.0));
            }
        }
    }
    if want_grad && active > 0 {
        terms.insert(0, (*pos, model.score_gradients(state, pos), -(active as f64)));
    }
    Contribution { loss, terms }
}

/// Margin ranking loss over explicit pairs:
///
/// `Σ_pos Σ_neg max(0, margin - score(pos) + score(neg)) / (|pos| · k)`
///
/// where `k` is the number of corruptions per positive. When `grads` is
/// given, the gradient of that mean is added into it; only
/// margin-violating pairs contribute. Contributions are reduced in input
/// order, so the result does not depend on `parallel`.
pub fn margin_loss(
    model: &Model,
    state: &EmbeddingState,
    pairs: &[Pair],
    margin: f64,
    grads: Option<&mut Gradients>,
    parallel: bool,
) -> f64 {
    let count: usize = pairs.iter().map(|(_, n)| n.len()).sum();
    if count == 0 {
        return 0.0;
    }
    let want_grad = grads.is_some();
    let contributions: Vec<Contribution> = if parallel {
        pairs
            .par_iter()
            .map(|p| pair_contribution(model, state, p, margin, want_grad))
            .collect()
    } else {
        pairs
            .iter()
            .map(|p| pair_contribution(model, state, p, margin, want_grad))
            .collect()
    };
    let scale = 1.0 / count as f64;
    let mut loss = 0.0;
    for c in &contributions {
        loss += c.loss;
    }
    if let Some(grads) = grads {
        for c in &contributions {
            for (t, g, coeff) in &c.terms {
                accumulate(grads, t, g, coeff * scale);
            }
        }
    }
    loss * scale
}

/// Sample `k` corruptions per positive and evaluate [`margin_loss`].
#[allow(clippy::too_many_arguments)]
pub fn batch_loss(
    model: &Model,
    state: &EmbeddingState,
    positives: &[Triple],
    k: usize,
    margin: f64,
    known: &HashSet<Triple>,
    rng: &mut Rng,
    stats: &mut SamplerStats,
    grads: Option<&mut Gradients>,
    parallel: bool,
) -> f64 {
    let n = state.num_entities();
    let pairs: Vec<Pair> = positives
        .iter()
        .map(|t| (*t, negative_sample(t, k, n, known, super::DEFAULT_MAX_RETRIES, rng, stats)))
        .collect();
    margin_loss(model, state, &pairs, margin, grads, parallel)
}
