//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use kgec_core::builder::{build_dataset, synth_clustered_kg, BaseSize, BuildSpec, Growth};
use kgec_core::continual::TrainConfig;
use kgec_core::harness::RunSpec;
use kgec_core::init::{InitKind, InitStrategy};
use kgec_core::kg_store::Dataset;
use kgec_core::{Model, ModelKind, Norm};

pub const SEEDS: [u64; 5] = [11, 22, 33, 44, 55];

/// 3 classes x 50 entities, base plus 4 increments of 60 train triples.
pub fn clustered_fixture() -> Dataset {
    let corpus = synth_clustered_kg(3, 50, 0.2, 0.02, 7).unwrap();
    let mut spec = BuildSpec::new(BaseSize::Fraction(0.7), 4, Growth::Counts(vec![60; 4]), 7);
    spec.split = (0.6, 0.2, 0.2);
    build_dataset(&corpus, &spec).unwrap().0
}

pub fn fixture_train(seed: u64) -> TrainConfig {
    TrainConfig {
        lr: 3e-3,
        batch_size: 64,
        dim: 32,
        negatives_k: 10,
        patience: 3,
        max_epochs: Some(200),
        margin: 1.0,
        seed,
        ..TrainConfig::default()
    }
}

pub fn fixture_spec(init: InitKind, seed: u64) -> RunSpec {
    let gamma = if init == InitKind::Schema { 0.5 } else { 0.0 };
    RunSpec {
        model: Model::new(ModelKind::TransE, Norm::L2),
        train: fixture_train(seed),
        init: InitStrategy::new(init, gamma).unwrap(),
        filtered: true,
    }
}

/// Small dataset with a base and `increments` snapshots, for quick runs.
pub fn toy_dataset(increments: usize) -> Dataset {
    let corpus = synth_clustered_kg(3, 20, 0.3, 0.05, 3).unwrap();
    let spec = BuildSpec::new(BaseSize::Fraction(0.7), increments, Growth::Counts(vec![20; increments]), 3);
    build_dataset(&corpus, &spec).unwrap().0
}

pub fn toy_train(seed: u64) -> TrainConfig {
    TrainConfig {
        lr: 1e-2,
        batch_size: 32,
        dim: 16,
        negatives_k: 4,
        patience: 3,
        max_epochs: Some(30),
        fisher_samples: 64,
        seed,
        ..TrainConfig::default()
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
