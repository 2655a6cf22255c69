//! Initial vectors for entities entering the graph.
//!
//! * `Random`: Xavier-uniform.
//! * `Model` / `ModelHeadOnly`: expected TransE position from the new
//!   triples the entity takes part in.
//! * `Schema`: average of the centroids of the entity's classes over the
//!   previously embedded entities, perturbed by `γ·σ_c ⊙ r_c`.
//!
//! When a strategy has nothing to work with for an entity (no class with
//! statistics, no usable triple) the configured fallback is used and
//! counted.

mod model_init;
mod schema_init;
mod stats;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use model_init::model_init_transe;
pub use schema_init::schema_vector;
pub use stats::{compute_class_stats, ClassStat, ClassStats};

use crate::error::{Error, Result};
use crate::kg_store::{Delta, Schema};
use crate::models::{xavier_init, EmbeddingState, Model};
use crate::rng::{stream_rng, Rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Random,
    Model,
    ModelHead,
    Schema,
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitKind::Random => "random",
            InitKind::Model => "model",
            InitKind::ModelHead => "model-head",
            InitKind::Schema => "schema",
        })
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitKind::Random),
            "model" => Ok(InitKind::Model),
            "model-head" => Ok(InitKind::ModelHead),
            "schema" => Ok(InitKind::Schema),
            other => Err(Error::config(format!("unknown init strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    /// Xavier-uniform.
    Random,
    /// Centroid of all embedded entities, perturbed with the global spread.
    Centroid,
}

impl FromStr for Fallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Fallback::Random),
            "centroid" => Ok(Fallback::Centroid),
            other => Err(Error::config(format!("unknown fallback `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitStrategy {
    pub kind: InitKind,
    /// Perturbation scale for schema and centroid initialization.
    pub gamma: f64,
    pub fallback: Fallback,
}

impl InitStrategy {
    pub fn new(kind: InitKind, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::config(format!("gamma must be a non-negative number, got {gamma}")));
        }
        let fallback = match kind {
            InitKind::Schema => Fallback::Centroid,
            _ => Fallback::Random,
        };
        Ok(InitStrategy {
            kind,
            gamma,
            fallback,
        })
    }

    pub fn random() -> Self {
        InitStrategy {
            kind: InitKind::Random,
            gamma: 0.0,
            fallback: Fallback::Random,
        }
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    fn needs_stats(&self) -> bool {
        self.kind == InitKind::Schema || self.fallback == Fallback::Centroid
    }
}

/// What happened while initializing one snapshot's new entities.
#[derive(Debug, Clone, PartialEq)]
pub struct InitReport {
    pub strategy: InitKind,
    pub snapshot: usize,
    pub new_entities: usize,
    pub new_relations: usize,
    /// Entities that went to the fallback strategy.
    pub fallback_count: usize,
    /// Wall-clock spent producing the new vectors.
    pub init_seconds: f64,
    /// Wall-clock spent refreshing class statistics beforehand.
    pub stats_seconds: f64,
}

/// Inputs to [`initialize_new_entities`].
#[derive(Debug, Clone, Copy)]
pub struct InitContext<'a> {
    pub model: &'a Model,
    pub delta: &'a Delta,
    pub schema: &'a Schema,
    pub seed: u64,
    pub snapshot: usize,
    pub parallel: bool,
}

fn entity_rng(seed: u64, snapshot: usize, e: usize) -> Rng {
    stream_rng(seed, Stream::EntityInit, ((snapshot as u64) << 40) ^ e as u64)
}

fn fallback_vector(
    strategy: &InitStrategy,
    stats: Option<&ClassStats>,
    dim: usize,
    rng: &mut Rng,
) -> Vec<f64> {
    match (strategy.fallback, stats.and_then(|s| s.global.as_ref())) {
        (Fallback::Centroid, Some(global)) => schema_init::perturbed(global, strategy.gamma, rng),
        _ => xavier_init(dim, rng),
    }
}

/// Initial vector for one new entity; the flag is set when the fallback
/// was used.
#[allow(clippy::too_many_arguments)]
fn init_one(
    strategy: &InitStrategy,
    ctx: &InitContext<'_>,
    state: &EmbeddingState,
    stats: Option<&ClassStats>,
    old_entities: usize,
    old_relations: usize,
    e: usize,
) -> Result<(Vec<f64>, bool)> {
    let mut rng = entity_rng(ctx.seed, ctx.snapshot, e);
    let dim = state.dim();
    let informed = match strategy.kind {
        InitKind::Random => return Ok((xavier_init(dim, &mut rng), false)),
        InitKind::Schema => {
            let stats = stats.expect("schema init computes class stats");
            schema_vector(ctx.schema.classes_of(e), stats, strategy.gamma, &mut rng)
        }
        InitKind::Model | InitKind::ModelHead => model_init_transe(
            ctx.model.kind,
            e,
            &ctx.delta.new_triples,
            state,
            old_entities,
            old_relations,
            strategy.kind == InitKind::ModelHead,
        )?,
    };
    Ok(match informed {
        Some(v) => (v, false),
        None => (fallback_vector(strategy, stats, dim, &mut rng), true),
    })
}

/// Schema initialization of a single entity against precomputed stats,
/// with fallback. Exposed for timing and testing.
pub fn schema_init(
    e: usize,
    schema: &Schema,
    stats: &ClassStats,
    strategy: &InitStrategy,
    rng: &mut Rng,
) -> (Vec<f64>, bool) {
    match schema_vector(schema.classes_of(e), stats, strategy.gamma, rng) {
        Some(v) => (v, false),
        None => {
            let dim = stats.global.as_ref().map_or(0, |g| g.centroid.len());
            (fallback_vector(strategy, Some(stats), dim.max(1), rng), true)
        }
    }
}

/// Append rows for every new relation and entity of `ctx.delta`.
///
/// Existing rows are left untouched. New relations always get the model's
/// random relation initialization. New ids must continue the dense ranges
/// of the current state.
pub fn initialize_new_entities(
    state: &mut EmbeddingState,
    strategy: &InitStrategy,
    ctx: &InitContext<'_>,
) -> Result<InitReport> {
    let old_entities = state.num_entities();
    let old_relations = state.num_relations();
    let delta = ctx.delta;
    let dense = |ids: &[usize], start: usize| ids.iter().enumerate().all(|(i, &id)| id == start + i);
    if !dense(&delta.new_entities, old_entities) || !dense(&delta.new_relations, old_relations) {
        return Err(Error::Validation(format!(
            "snapshot {}: new ids do not extend the embedded ranges (entities from {}, relations from {})",
            ctx.snapshot, old_entities, old_relations
        )));
    }
    if strategy.kind == InitKind::Model || strategy.kind == InitKind::ModelHead {
        // surface the configuration error even for an empty delta
        model_init_transe(ctx.model.kind, usize::MAX, &[], state, 0, 0, false)?;
    }

    let mut rel_rng = stream_rng(ctx.seed, Stream::RelationInit, ctx.snapshot as u64);
    for _ in &delta.new_relations {
        ctx.model.push_relation(state, &mut rel_rng);
    }

    let stats_start = Instant::now();
    let stats = (strategy.needs_stats() && !delta.new_entities.is_empty())
        .then(|| compute_class_stats(state, ctx.schema, 0..old_entities));
    let stats_seconds = stats_start.elapsed().as_secs_f64();

    let start = Instant::now();
    let frozen: &EmbeddingState = state;
    let one = |&e: &usize| init_one(strategy, ctx, frozen, stats.as_ref(), old_entities, old_relations, e);
    let rows: Vec<(Vec<f64>, bool)> = if ctx.parallel {
        delta.new_entities.par_iter().map(one).collect::<Result<_>>()?
    } else {
        delta.new_entities.iter().map(one).collect::<Result<_>>()?
    };
    let init_seconds = start.elapsed().as_secs_f64();

    let fallback_count = rows.iter().filter(|(_, fb)| *fb).count();
    for (v, _) in &rows {
        state.entities.push_row(v);
    }
    Ok(InitReport {
        strategy: strategy.kind,
        snapshot: ctx.snapshot,
        new_entities: delta.new_entities.len(),
        new_relations: delta.new_relations.len(),
        fallback_count,
        init_seconds,
        stats_seconds,
    })
}
