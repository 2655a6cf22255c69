//! Continual knowledge graph embeddings.
//!
//! Embeddings are trained over a growing sequence of graph snapshots. When
//! a snapshot introduces new entities, their vectors can be initialized at
//! random, from the model's expected position given their triples, or from
//! the centroids of the classes they belong to; the result is then updated
//! by fine-tuning, EWC or experience replay. Retention of base knowledge and
//! acquisition of new knowledge are tracked through an accuracy matrix.
#![allow(clippy::needless_range_loop)]

pub mod builder;
pub mod continual;
pub mod error;
pub mod eval;
pub mod harness;
pub mod init;
pub mod kg_store;
pub mod models;
pub mod rng;

pub use error::{Error, Result};
pub use kg_store::{Delta, Schema, Snapshot, SnapshotSequence, Triple, TripleSet, Vocabulary};
pub use models::{EmbeddingState, Model, ModelKind, Norm};
