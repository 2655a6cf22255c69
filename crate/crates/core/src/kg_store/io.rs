//! Tab-separated triple and schema files, and the on-disk dataset layout:
//!
//! ```text
//! <root>/schema.tsv
//! <root>/snapshot0/{train,valid,test}.tsv
//! <root>/snapshot1/{train,valid,test}.tsv
//! ...
//! ```
//!
//! Snapshot files hold only the triples a snapshot adds; the cumulative view
//! is rebuilt in memory.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::schema::Schema;
use super::snapshot::{SnapshotSequence, Splits};
use super::triple::{Triple, TripleSet};
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

pub const SCHEMA_FILE: &str = "schema.tsv";

pub fn snapshot_dir(root: &Path, i: usize) -> PathBuf {
    root.join(format!("snapshot{i}"))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

fn split_fields(line: &str) -> Option<Vec<&str>> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() {
        return None;
    }
    Some(line.split('\t').collect())
}

/// Parse `head<TAB>relation<TAB>tail` lines from text, interning unseen
/// tokens in first-seen order.
pub fn parse_triples(text: &str, path: &Path, vocab: &mut Vocabulary) -> Result<TripleSet> {
    let mut out = TripleSet::new();
    for (n, line) in text.lines().enumerate() {
        let Some(fields) = split_fields(line) else {
            continue;
        };
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: n + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let head = vocab.entities.intern(fields[0]);
        let relation = vocab.relations.intern(fields[1]);
        let tail = vocab.entities.intern(fields[2]);
        out.push(Triple::new(head, relation, tail));
    }
    Ok(out)
}

pub fn load_triples(path: &Path, vocab: &mut Vocabulary) -> Result<TripleSet> {
    let text = read_lines(path)?.join("\n");
    parse_triples(&text, path, vocab)
}

/// Parse `entity<TAB>class` lines. Unknown entity tokens are skipped and
/// counted in [`Schema::skipped`].
pub fn parse_schema(text: &str, path: &Path, vocab: &Vocabulary) -> Result<Schema> {
    let mut schema = Schema::new();
    for (n, line) in text.lines().enumerate() {
        let Some(fields) = split_fields(line) else {
            continue;
        };
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: n + 1,
                message: format!("expected 2 tab-separated fields, found {}", fields.len()),
            });
        }
        match vocab.entities.get(fields[0]) {
            Some(e) => {
                schema.assign(e, fields[1]);
            }
            None => schema.skipped += 1,
        }
    }
    if schema.skipped > 0 {
        log::warn!("{}: skipped {} lines with unknown entities", path.display(), schema.skipped);
    }
    Ok(schema)
}

pub fn load_schema(path: &Path, vocab: &Vocabulary) -> Result<Schema> {
    let text = read_lines(path)?.join("\n");
    parse_schema(&text, path, vocab)
}

pub fn write_triples(path: &Path, triples: &[Triple], vocab: &Vocabulary) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let tok = |interner: &super::vocab::Interner, id: usize| -> Result<String> {
        interner
            .token(id)
            .map(str::to_owned)
            .ok_or_else(|| Error::contract(format!("id {id} not in vocabulary")))
    };
    for t in triples {
        writeln!(
            w,
            "{}\t{}\t{}",
            tok(&vocab.entities, t.head)?,
            tok(&vocab.relations, t.relation)?,
            tok(&vocab.entities, t.tail)?
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_schema(path: &Path, schema: &Schema, vocab: &Vocabulary) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (e, c) in schema.pairs() {
        let (Some(et), Some(ct)) = (vocab.entities.token(e), schema.class_name(c)) else {
            continue;
        };
        writeln!(w, "{et}\t{ct}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A loaded dataset directory.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub sequence: SnapshotSequence,
    pub schema: Schema,
}

/// Load `snapshot0..snapshotN` and `schema.tsv` from `root`.
///
/// All train files are read before any valid/test file so that embedded
/// entities and relations get the dense ids `0..|E_i|` at every step.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    let mut count = 0;
    while snapshot_dir(root, count).is_dir() {
        count += 1;
    }
    if count == 0 {
        return Err(Error::Validation(format!(
            "{} contains no snapshot0 directory",
            root.display()
        )));
    }

    let mut vocab = Vocabulary::new();
    let mut trains = Vec::with_capacity(count);
    for i in 0..count {
        trains.push(load_triples(&snapshot_dir(root, i).join("train.tsv"), &mut vocab)?);
    }
    let mut splits = Vec::with_capacity(count);
    for (i, train) in trains.into_iter().enumerate() {
        let dir = snapshot_dir(root, i);
        let valid = load_optional(&dir.join("valid.tsv"), &mut vocab)?;
        let test = load_optional(&dir.join("test.tsv"), &mut vocab)?;
        splits.push(Splits { train, valid, test });
    }

    let schema_path = root.join(SCHEMA_FILE);
    let schema = if schema_path.exists() {
        load_schema(&schema_path, &vocab)?
    } else {
        Schema::new()
    };
    Ok(Dataset {
        sequence: SnapshotSequence::from_deltas(vocab, splits),
        schema,
    })
}

fn load_optional(path: &Path, vocab: &mut Vocabulary) -> Result<TripleSet> {
    if path.exists() {
        load_triples(path, vocab)
    } else {
        Ok(TripleSet::new())
    }
}

/// Write a sequence back to the delta layout.
pub fn write_dataset(root: &Path, seq: &SnapshotSequence, schema: &Schema) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    for i in 0..seq.len() {
        let dir = snapshot_dir(root, i);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let delta = seq.delta(i)?;
        let snap = seq.snapshot(i);
        write_triples(&dir.join("train.tsv"), &delta.new_triples, &seq.vocab)?;
        write_triples(&dir.join("valid.tsv"), &snap.valid, &seq.vocab)?;
        write_triples(&dir.join("test.tsv"), &snap.test, &seq.vocab)?;
    }
    write_schema(&root.join(SCHEMA_FILE), schema, &seq.vocab)
}
