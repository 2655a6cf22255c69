//! Inputs shared by the criterion benchmarks in `benches/`.

use kgec_core::kg_store::Schema;
use kgec_core::models::Matrix;
use kgec_core::rng::seeded;
use kgec_core::{EmbeddingState, Triple};
use rand::Rng;

/// Uniform `[-1, 1)` embeddings.
pub fn random_state(entities: usize, relations: usize, dim: usize, seed: u64) -> EmbeddingState {
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

pub fn random_triples(n: usize, entities: usize, relations: usize, seed: u64) -> Vec<Triple> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| Triple::new(rng.random_range(0..entities), rng.random_range(0..relations), rng.random_range(0..entities)))
        .collect()
}

/// Every entity gets one of `classes` classes, round robin.
pub fn round_robin_schema(entities: usize, classes: usize) -> Schema {
    let mut schema = Schema::new();
    for e in 0..entities {
        schema.assign(e, &format!("c{}", e % classes));
    }
    schema
}
