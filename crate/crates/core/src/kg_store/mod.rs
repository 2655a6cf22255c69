//! Snapshot sequences, vocabularies and schemas.

mod io;
mod schema;
mod snapshot;
mod triple;
mod vocab;

pub use io::{
    load_dataset, load_schema, load_triples, parse_schema, parse_triples, snapshot_dir,
    write_dataset, write_schema, write_triples, Dataset, SCHEMA_FILE,
};
pub use schema::{ClassId, Schema};
pub use snapshot::{
    compute_delta, validate_sequence, Delta, Issue, Snapshot, SnapshotSequence, Splits,
    ValidationReport,
};
pub use triple::{Triple, TripleSet};
pub use vocab::{Interner, Vocabulary};
