mod common;

use std::collections::HashSet;

use kgec_core::continual::{fisher_from_pairs, fit, ContinualKind, FitData};
use kgec_core::harness::{run_sequence, RunSpec};
use kgec_core::init::{InitKind, InitStrategy};
use kgec_core::models::Matrix;
use kgec_core::rng::seeded;
use kgec_core::{EmbeddingState, Model, ModelKind, Norm, Triple};
use rand::Rng;

use common::{toy_dataset, toy_train, SEEDS};

fn small_state(seed: u64, entities: usize, relations: usize, dim: usize) -> EmbeddingState {
    let mut rng = seeded(seed);
    let mut m = |rows: usize| {
        let data: Vec<Vec<f64>> = (0..rows).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        Matrix::from_rows(dim, &data)
    };
    let entities = m(entities);
    let relations = m(relations);
    EmbeddingState {
        entities,
        relations,
        aux: None,
    }
}

fn toy_triples() -> Vec<Triple> {
    vec![
        Triple::new(0, 0, 1),
        Triple::new(1, 0, 2),
        Triple::new(2, 1, 3),
        Triple::new(3, 1, 4),
        Triple::new(4, 0, 0),
    ]
}

#[test]
fn early_stopping_returns_best_checkpoint() {
    let model = Model::new(ModelKind::TransE, Norm::L1);
    let mut state = small_state(1, 5, 2, 4);
    let train = toy_triples();
    let known: HashSet<Triple> = train.iter().copied().collect();
    let data = FitData {
        train: &train,
        known: &known,
        penalty: None,
    };
    let mut config = toy_train(1);
    config.patience = 3;
    config.max_epochs = None;

    let scripted = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4];
    let mut seen = Vec::new();
    let log = fit(&model, &mut state, &data, &config, &mut seeded(2), |s| {
        seen.push(s.clone());
        Some(scripted[seen.len() - 1])
    });
    assert_eq!(log.epochs.len(), 4);
    assert_eq!(log.epochs_to_convergence, 1);
    assert_eq!(log.best_valid_mrr, Some(0.9));
    assert_eq!(state, seen[0]);
    assert_ne!(state, seen[3]);
}

#[test]
fn max_epochs_caps_training() {
    let model = Model::new(ModelKind::TransE, Norm::L2);
    let mut state = small_state(3, 5, 2, 4);
    let train = toy_triples();
    let known: HashSet<Triple> = train.iter().copied().collect();
    let data = FitData {
        train: &train,
        known: &known,
        penalty: None,
    };
    let mut config = toy_train(3);
    config.max_epochs = Some(10);
    // always improving, so only the cap can stop it
    let mut epoch = 0.0;
    let log = fit(&model, &mut state, &data, &config, &mut seeded(4), |_| {
        epoch += 1.0;
        Some(epoch)
    });
    assert_eq!(log.epochs.len(), 10);
    assert_eq!(log.epochs_to_convergence, 10);
}

#[test]
fn missing_validation_monitors_loss() {
    let model = Model::new(ModelKind::TransE, Norm::L2);
    let mut state = small_state(5, 5, 2, 4);
    let train = toy_triples();
    let known: HashSet<Triple> = train.iter().copied().collect();
    let data = FitData {
        train: &train,
        known: &known,
        penalty: None,
    };
    let mut config = toy_train(5);
    config.max_epochs = Some(8);
    let log = fit(&model, &mut state, &data, &config, &mut seeded(6), |_| None);
    let best = log.epochs.iter().map(|e| e.loss).fold(f64::INFINITY, f64::min);
    assert_eq!(log.epochs[log.epochs_to_convergence - 1].loss, best);
    assert!(log.best_valid_mrr.is_none());
}

fn spec(strategy: ContinualKind, seed: u64, lr: f64) -> RunSpec {
    let mut train = toy_train(seed);
    train.strategy = strategy;
    train.lr = lr;
    RunSpec {
        model: Model::new(ModelKind::TransE, Norm::L2),
        train,
        init: InitStrategy::new(InitKind::Schema, 0.5).unwrap(),
        filtered: true,
    }
}

#[test]
fn embedding_rows_grow_with_the_sequence() {
    let ds = toy_dataset(3);
    for strategy in [ContinualKind::Ft, ContinualKind::Ewc, ContinualKind::Emr] {
        let mut rows = Vec::new();
        run_sequence(&ds, &spec(strategy, 1, 1e-2), |i, s| {
            assert_eq!(s.num_entities(), ds.sequence.snapshot(i).entities.len());
            rows.push((s.num_entities(), s.num_relations()));
            Ok(())
        })
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }
}

#[test]
fn loss_descends_for_every_strategy() {
    let ds = toy_dataset(2);
    for strategy in [ContinualKind::Ft, ContinualKind::Ewc, ContinualKind::Emr] {
        for seed in SEEDS {
            let mut spec = spec(strategy, seed, 1e-3);
            // fixed length so early stopping cannot cut a noisy run short
            spec.train.patience = usize::MAX;
            spec.train.max_epochs = Some(30);
            let result = run_sequence(&ds, &spec, |_, _| Ok(())).unwrap();
            for log in &result.logs {
                let mean = |e: &[kgec_core::continual::EpochRecord]| e.iter().map(|r| r.loss).sum::<f64>() / e.len() as f64;
                let first = mean(&log.epochs[..5]);
                let last = mean(&log.epochs[25..]);
                assert!(last < first, "{strategy} seed {seed} snapshot {}: {first} -> {last}", log.snapshot);
            }
        }
    }
}

/// Per-positive hinge loss, averaged over its negatives.
fn pair_loss(model: &Model, state: &EmbeddingState, pos: &Triple, negs: &[Triple], margin: f64) -> f64 {
    let s = model.score(state, pos);
    negs.iter().map(|n| (margin - s + model.score(state, n)).max(0.0)).sum::<f64>() / negs.len() as f64
}

fn bump(s: &mut EmbeddingState, block: usize, row: usize, k: usize, by: f64) {
    let m = if block == 0 { &mut s.entities } else { &mut s.relations };
    m.row_mut(row)[k] += by;
}

#[test]
fn fisher_matches_finite_difference_squares() {
    let model = Model::new(ModelKind::TransE, Norm::L2);
    let state = small_state(7, 5, 2, 3);
    let margin = 2.0;
    let pairs: Vec<(Triple, Vec<Triple>)> = toy_triples()
        .into_iter()
        .map(|t| (t, vec![Triple::new(t.head, t.relation, (t.tail + 2) % 5), Triple::new((t.head + 3) % 5, t.relation, t.tail)]))
        .collect();
    let fisher = fisher_from_pairs(&model, &state, &pairs, margin);

    let h = 1e-6;
    let mut expect = EmbeddingState::zeros_like(&state);
    for (pos, negs) in &pairs {
        for block in 0..2 {
            let rows = if block == 0 { state.num_entities() } else { state.num_relations() };
            for row in 0..rows {
                for k in 0..state.dim() {
                    let mut probe = state.clone();
                    bump(&mut probe, block, row, k, h);
                    let up = pair_loss(&model, &probe, pos, negs, margin);
                    bump(&mut probe, block, row, k, -2.0 * h);
                    let down = pair_loss(&model, &probe, pos, negs, margin);
                    let g = (up - down) / (2.0 * h);
                    let m = if block == 0 { &mut expect.entities } else { &mut expect.relations };
                    m.row_mut(row)[k] += g * g / pairs.len() as f64;
                }
            }
        }
    }
    for (a, b) in fisher.blocks().iter().zip(expect.blocks()) {
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-6 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }
}
