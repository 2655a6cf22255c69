//! Incremental dataset construction from a flat corpus, and a synthetic
//! class-clustered corpus generator.

mod build;
mod spec;
mod synth;

pub use build::{build_dataset, build_snapshots, load_corpus, BuildManifest, SnapshotCounts, MANIFEST_FILE};
pub use spec::{BaseSize, BuildSpec, Growth};
pub use synth::{synth_clustered_kg, Corpus};
