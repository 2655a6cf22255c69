use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;

use super::config::{ContinualKind, TrainConfig};
use super::emr::emr_replay;
use super::ewc::{estimate_fisher, EwcPenalty};
use crate::error::{Error, Result};
use crate::eval::{evaluate_split, FilterIndex};
use crate::init::{initialize_new_entities, InitContext, InitReport, InitStrategy};
use crate::kg_store::{Schema, SnapshotSequence, Triple};
use crate::models::{margin_loss, negative_sample, Adam, AdamConfig, EmbeddingState, Gradients, Model, Pair, SamplerStats, DEFAULT_MAX_RETRIES};
use crate::rng::{stream_rng, Rng, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub loss: f64,
    /// `None` when the validation split had nothing to rank.
    pub valid_mrr: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub snapshot: usize,
    pub epochs: Vec<EpochRecord>,
    /// Epoch of the returned (best validation) checkpoint.
    pub epochs_to_convergence: usize,
    pub best_valid_mrr: Option<f64>,
    pub total_seconds: f64,
    pub init: Option<InitReport>,
    pub false_negatives: usize,
}

impl TrainLog {
    pub fn epoch_seconds(&self) -> f64 {
        self.epochs.iter().map(|e| e.seconds).sum()
    }

    pub fn mean_epoch_seconds(&self) -> f64 {
        if self.epochs.is_empty() {
            0.0
        } else {
            self.epoch_seconds() / self.epochs.len() as f64
        }
    }
}

/// Everything [`fit`] trains against.
pub struct FitData<'a> {
    pub train: &'a [Triple],
    /// True triples that negative sampling must avoid.
    pub known: &'a HashSet<Triple>,
    pub penalty: Option<&'a EwcPenalty>,
}

/// Adam on the margin ranking loss with early stopping.
///
/// After every epoch `validate` is called; the state with the highest value
/// is kept, and training stops once `patience` epochs pass without a strict
/// improvement or `max_epochs` is reached. When `validate` returns `None`
/// the negated epoch loss is monitored instead. On return `state` holds the
/// best checkpoint.
pub fn fit(
    model: &Model,
    state: &mut EmbeddingState,
    data: &FitData<'_>,
    config: &TrainConfig,
    rng: &mut Rng,
    mut validate: impl FnMut(&EmbeddingState) -> Option<f64>,
) -> TrainLog {
    let start = Instant::now();
    let mut adam = Adam::new(AdamConfig::with_lr(config.lr), state);
    let mut grads = Gradients::zeros_like(state);
    let mut order: Vec<Triple> = data.train.to_vec();
    let mut sampler = SamplerStats::default();
    let mut epochs = Vec::new();
    let mut best: Option<(f64, usize, EmbeddingState, Option<f64>)> = None;
    let parallel = !config.deterministic;

    let mut epoch = 0;
    loop {
        epoch += 1;
        let t0 = Instant::now();
        order.shuffle(rng);
        let mut hinge_sum = 0.0;
        let mut penalty_sum = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(config.batch_size) {
            let pairs: Vec<Pair> = batch
                .iter()
                .map(|t| {
                    let negs = negative_sample(t, config.negatives_k, state.num_entities(), data.known, DEFAULT_MAX_RETRIES, rng, &mut sampler);
                    (*t, negs)
                })
                .collect();
            grads.clear();
            let loss = margin_loss(model, state, &pairs, config.margin, Some(&mut grads), parallel);
            hinge_sum += loss * batch.len() as f64;
            if let Some(p) = data.penalty {
                penalty_sum += p.apply(state, Some(&mut grads));
            }
            if config.l2 > 0.0 {
                for (g, p) in grads.blocks_mut().into_iter().zip(state.blocks()) {
                    for (gi, pi) in g.as_mut_slice().iter_mut().zip(p.as_slice()) {
                        *gi += config.l2 * pi;
                    }
                }
            }
            adam.step(state, &grads);
            model.project(state);
            batches += 1;
        }
        let loss = hinge_sum / order.len().max(1) as f64 + penalty_sum / batches.max(1) as f64;
        let valid = validate(state);
        let monitor = valid.unwrap_or(-loss);
        epochs.push(EpochRecord {
            epoch,
            loss,
            valid_mrr: valid,
            seconds: t0.elapsed().as_secs_f64(),
        });

        let improved = best.as_ref().is_none_or(|(b, ..)| monitor > *b);
        if improved {
            best = Some((monitor, epoch, state.clone(), valid));
        }
        let best_epoch = best.as_ref().map_or(epoch, |b| b.1);
        if epoch - best_epoch >= config.patience {
            break;
        }
        if config.max_epochs.is_some_and(|m| epoch >= m) {
            break;
        }
    }

    let (_, best_epoch, best_state, best_valid) = best.expect("at least one epoch ran");
    *state = best_state;
    TrainLog {
        snapshot: 0,
        epochs,
        epochs_to_convergence: best_epoch,
        best_valid_mrr: best_valid,
        total_seconds: start.elapsed().as_secs_f64(),
        init: None,
        false_negatives: sampler.false_negatives,
    }
}

/// Validation MRR on `valid`, filtered by `filter`; `None` when nothing
/// could be ranked.
pub fn validation_mrr(model: &Model, state: &EmbeddingState, valid: &[Triple], filter: &FilterIndex, parallel: bool) -> Option<f64> {
    let m = evaluate_split(model, state, valid, Some(filter), parallel);
    (m.queries > 0).then_some(m.mrr)
}

/// Train snapshot 0 from scratch: Xavier initialization of every entity and
/// relation, then [`fit`] with early stopping on the snapshot's validation
/// split.
pub fn train_base(model: &Model, seq: &SnapshotSequence, config: &TrainConfig) -> Result<(EmbeddingState, TrainLog)> {
    config.validate()?;
    let start = Instant::now();
    let snap = seq
        .snapshots
        .first()
        .ok_or_else(|| Error::config("sequence has no snapshots"))?;
    if snap.train.is_empty() {
        return Err(Error::config("snapshot 0 has an empty train split"));
    }
    if snap.entities.len() < 2 {
        return Err(Error::config("snapshot 0 needs at least two entities"));
    }
    let mut init_rng = stream_rng(config.seed, Stream::BaseInit, 0);
    let mut state = model.init_state(snap.entities.len(), snap.relations.len(), config.dim, &mut init_rng)?;
    let known = snap.train.to_hash_set();
    let filter = FilterIndex::new(&seq.known_triples(0));
    let parallel = !config.deterministic;
    let mut rng = stream_rng(config.seed, Stream::Train, 0);
    let data = FitData {
        train: &snap.train,
        known: &known,
        penalty: None,
    };
    let mut log = fit(model, &mut state, &data, config, &mut rng, |s| {
        validation_mrr(model, s, &snap.valid, &filter, parallel)
    });
    log.total_seconds = start.elapsed().as_secs_f64();
    Ok((state, log))
}

/// Inputs to one incremental update.
#[derive(Debug, Clone, Copy)]
pub struct Increment<'a> {
    pub seq: &'a SnapshotSequence,
    pub schema: &'a Schema,
    /// Snapshot index `i >= 1`.
    pub index: usize,
}

/// Initialize the new entities of snapshot `i`, then update all embeddings
/// on its new triples with the configured continual strategy, stopping
/// early on snapshot `i`'s validation split.
pub fn train_increment(
    model: &Model,
    mut state: EmbeddingState,
    inc: Increment<'_>,
    init: &InitStrategy,
    config: &TrainConfig,
) -> Result<(EmbeddingState, TrainLog)> {
    config.validate()?;
    let start = Instant::now();
    let i = inc.index;
    if i == 0 || i >= inc.seq.len() {
        return Err(Error::config(format!("increment index {i} out of range")));
    }
    let delta = inc.seq.delta(i)?;
    if delta.new_triples.is_empty() {
        return Err(Error::Validation(format!("snapshot {i} adds no triples")));
    }
    delta.check_coverage()?;
    let prev = inc.seq.snapshot(i - 1);
    let curr = inc.seq.snapshot(i);
    if state.num_entities() != prev.entities.len() || state.num_relations() != prev.relations.len() {
        return Err(Error::Validation(format!(
            "state has {}x{} rows but snapshot {} embeds {} entities and {} relations",
            state.num_entities(),
            state.num_relations(),
            i - 1,
            prev.entities.len(),
            prev.relations.len()
        )));
    }

    let parallel = !config.deterministic;
    let known = curr.train.to_hash_set();

    // Anchor and Fisher come from the state entering this snapshot.
    let penalty = if config.strategy == ContinualKind::Ewc {
        let prev_known = prev.train.to_hash_set();
        let mut fisher_rng = stream_rng(config.seed, Stream::Fisher, i as u64);
        let fisher = estimate_fisher(
            model,
            &state,
            &prev.train,
            config.fisher_samples,
            config.negatives_k,
            config.margin,
            &prev_known,
            &mut fisher_rng,
        )?;
        Some(EwcPenalty::new(state.clone(), fisher, config.ewc_lambda)?)
    } else {
        None
    };

    let ctx = InitContext {
        model,
        delta: &delta,
        schema: inc.schema,
        seed: config.seed,
        snapshot: i,
        parallel,
    };
    let report = initialize_new_entities(&mut state, init, &ctx)?;

    let mut train: Vec<Triple> = delta.new_triples.to_vec();
    if config.strategy == ContinualKind::Emr {
        let mut replay_rng = stream_rng(config.seed, Stream::Replay, i as u64);
        let replay = emr_replay(&prev.train, config.replay_size(prev.train.len()), &mut replay_rng);
        train.extend(replay.iter().copied());
    }

    let filter = FilterIndex::new(&inc.seq.known_triples(i));
    let mut rng = stream_rng(config.seed, Stream::Train, i as u64);
    let data = FitData {
        train: &train,
        known: &known,
        penalty: penalty.as_ref(),
    };
    let mut log = fit(model, &mut state, &data, config, &mut rng, |s| {
        validation_mrr(model, s, &curr.valid, &filter, parallel)
    });
    log.snapshot = i;
    log.init = Some(report);
    log.total_seconds = start.elapsed().as_secs_f64();
    Ok((state, log))
}
