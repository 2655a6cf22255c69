use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::spec::{BaseSize, BuildSpec};
use super::synth::Corpus;
use crate::error::{Error, Result};
use crate::kg_store::{load_schema, load_triples, write_dataset, Dataset, Schema, SnapshotSequence, Splits, Triple, TripleSet, Vocabulary};
use crate::rng::{stream_rng, Rng, Stream};

pub const MANIFEST_FILE: &str = "build_manifest.json";

/// Achieved sizes of one built snapshot (delta counts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotCounts {
    pub snapshot: usize,
    pub target_train: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub new_entities: usize,
    pub new_relations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildManifest {
    pub spec: BuildSpec,
    pub seed: u64,
    pub corpus_triples: usize,
    pub snapshots: Vec<SnapshotCounts>,
}

/// Read a flat corpus TSV and an optional `entity<TAB>class` schema TSV.
pub fn load_corpus(triples: &Path, schema: Option<&Path>) -> Result<Corpus> {
    let mut vocab = Vocabulary::new();
    let triples = load_triples(triples, &mut vocab)?;
    let schema = match schema {
        Some(p) => load_schema(p, &vocab)?,
        None => Schema::new(),
    };
    Ok(Corpus { vocab, triples, schema })
}

/// Build the dataset and write it to `out` together with
/// [`MANIFEST_FILE`].
pub fn build_snapshots(corpus: &Corpus, spec: &BuildSpec, out: &Path) -> Result<(Dataset, BuildManifest)> {
    let (dataset, manifest) = build_dataset(corpus, spec)?;
    write_dataset(out, &dataset.sequence, &dataset.schema)?;
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::config(e.to_string()))?;
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok((dataset, manifest))
}

struct Pools {
    adjacency: Vec<Vec<usize>>,
    triples: Vec<Triple>,
}

impl Pools {
    fn new(corpus: &Corpus) -> Self {
        let mut triples = corpus.triples.to_vec();
        triples.sort_unstable();
        triples.dedup();
        let n = corpus.vocab.num_entities();
        let mut adjacency = vec![Vec::new(); n];
        for (i, t) in triples.iter().enumerate() {
            adjacency[t.head].push(i);
            if t.tail != t.head {
                adjacency[t.tail].push(i);
            }
        }
        Pools { adjacency, triples }
    }

    /// Triples of `e` whose other endpoint is in `included` (or `e` itself).
    fn pull(&self, e: usize, included: &HashSet<usize>) -> Vec<Triple> {
        self.adjacency[e]
            .iter()
            .map(|&i| self.triples[i])
            .filter(|t| {
                let other = if t.head == e { t.tail } else { t.head };
                other == e || included.contains(&other)
            })
            .collect()
    }
}

/// Build in memory: snapshot 0 from a random entity subset, then each
/// increment by pulling fresh entities (uniformly ordered) with all their
/// triples to already-included entities until the growth target is met.
pub fn build_dataset(corpus: &Corpus, spec: &BuildSpec) -> Result<(Dataset, BuildManifest)> {
    spec.validate()?;
    let pools = Pools::new(corpus);
    let (r_train, _, _) = spec.split;
    let mut rng = stream_rng(spec.seed, Stream::Build, 0);

    let (base_train, base_total) = match spec.base {
        BaseSize::Count(n) => (n, (n as f64 / r_train).round() as usize),
        BaseSize::Fraction(f) => {
            let total = (f * pools.triples.len() as f64).round() as usize;
            ((total as f64 * r_train).round() as usize, total)
        }
    };
    if base_total > pools.triples.len() {
        return Err(Error::Build {
            snapshot: 0,
            message: format!("base needs {base_total} triples but the corpus has {}", pools.triples.len()),
        });
    }

    let mut order: Vec<usize> = (0..corpus.vocab.num_entities()).collect();
    order.shuffle(&mut rng);

    let mut included = HashSet::new();
    let mut pool = Vec::new();
    let mut cursor = 0;
    while pool.len() < base_total && cursor < order.len() {
        let e = order[cursor];
        cursor += 1;
        included.insert(e);
        pool.extend(pools.pull(e, &included));
    }
    let mut covered = Coverage::default();
    let base = split_block(pool, &mut covered, base_train, base_total, spec.split, &mut rng, 0)?;
    let mut blocks = vec![base];
    let mut counts = vec![counts_of(0, base_train, &blocks[0], &covered, (0, 0))];

    let mut candidates: Vec<usize> = order.into_iter().filter(|e| !covered.entities.contains(e)).collect();
    for (i, &target) in spec.growth_targets(base_train).iter().enumerate() {
        let snapshot = i + 1;
        let total_target = (target as f64 / r_train).round() as usize;
        let mut included = covered.entities.clone();
        let mut pool = Vec::new();
        let mut rest = Vec::new();
        for e in candidates {
            if pool.len() >= total_target {
                rest.push(e);
                continue;
            }
            let pulled = pools.pull(e, &included);
            if pulled.iter().all(|t| t.head == t.tail) {
                rest.push(e);
                continue;
            }
            included.insert(e);
            pool.extend(pulled);
        }
        candidates = rest;
        if pool.is_empty() {
            return Err(Error::Build {
                snapshot,
                message: "no fresh entity connects to the existing graph".into(),
            });
        }
        let before = (covered.entities.len(), covered.relations.len());
        let block = split_block(pool, &mut covered, target, total_target, spec.split, &mut rng, snapshot)?;
        counts.push(counts_of(snapshot, target, &block, &covered, before));
        blocks.push(block);
    }

    for c in &counts {
        let diff = (c.train as f64 - c.target_train as f64).abs();
        if diff > 0.1 * c.target_train as f64 {
            return Err(Error::Build {
                snapshot: c.snapshot,
                message: format!("achieved {} train triples against a target of {}", c.train, c.target_train),
            });
        }
    }

    let dataset = remap(corpus, blocks);
    let manifest = BuildManifest {
        spec: spec.clone(),
        seed: spec.seed,
        corpus_triples: pools.triples.len(),
        snapshots: counts,
    };
    Ok((dataset, manifest))
}

#[derive(Default)]
struct Coverage {
    entities: HashSet<usize>,
    relations: HashSet<usize>,
}

fn counts_of(snapshot: usize, target: usize, block: &Splits, covered: &Coverage, before: (usize, usize)) -> SnapshotCounts {
    SnapshotCounts {
        snapshot,
        target_train: target,
        train: block.train.len(),
        valid: block.valid.len(),
        test: block.test.len(),
        new_entities: covered.entities.len() - before.0,
        new_relations: covered.relations.len() - before.1,
    }
}

/// Split a snapshot's triple pool. One train triple per not-yet-covered
/// entity and relation is reserved first, so valid/test never mention
/// anything without a train triple.
fn split_block(
    mut pool: Vec<Triple>,
    covered: &mut Coverage,
    train_target: usize,
    total_target: usize,
    (r_train, r_valid, r_test): (f64, f64, f64),
    rng: &mut Rng,
    snapshot: usize,
) -> Result<Splits> {
    pool.shuffle(rng);
    let mut anchors = Vec::new();
    let mut others = Vec::new();
    for t in pool {
        let fresh = !covered.entities.contains(&t.head)
            || !covered.entities.contains(&t.tail)
            || !covered.relations.contains(&t.relation);
        if fresh {
            covered.entities.insert(t.head);
            covered.entities.insert(t.tail);
            covered.relations.insert(t.relation);
            anchors.push(t);
        } else {
            others.push(t);
        }
    }
    let available = anchors.len() + others.len();
    let total = available.min(total_target);
    let wanted = if available >= total_target {
        train_target
    } else {
        (total as f64 * r_train).round() as usize
    };
    let n_train = wanted.max(anchors.len());
    if n_train > available {
        return Err(Error::Build {
            snapshot,
            message: format!("needs {n_train} train triples but only {available} are available"),
        });
    }
    let eval = total.saturating_sub(n_train);
    let n_valid = if r_valid + r_test > 0.0 {
        (eval as f64 * r_valid / (r_valid + r_test)).round() as usize
    } else {
        0
    };
    let mut rest = others.into_iter();
    let mut train = anchors;
    train.extend(rest.by_ref().take(n_train - train.len()));
    let mut valid: Vec<Triple> = rest.by_ref().take(n_valid).collect();
    let mut test: Vec<Triple> = rest.take(eval - n_valid).collect();
    train.sort_unstable();
    valid.sort_unstable();
    test.sort_unstable();
    Ok(Splits {
        train: train.into(),
        valid: valid.into(),
        test: test.into(),
    })
}

/// Re-encode with dense ids in the order `load_dataset` would assign them.
fn remap(corpus: &Corpus, blocks: Vec<Splits>) -> Dataset {
    let mut vocab = Vocabulary::new();
    let encode = |t: &Triple, vocab: &mut Vocabulary| {
        let ent = |e: usize| corpus.vocab.entities.token(e).expect("corpus entity");
        let head = vocab.entities.intern(ent(t.head));
        let relation = vocab
            .relations
            .intern(corpus.vocab.relations.token(t.relation).expect("corpus relation"));
        let tail = vocab.entities.intern(ent(t.tail));
        Triple::new(head, relation, tail)
    };
    let trains: Vec<TripleSet> = blocks
        .iter()
        .map(|b| b.train.iter().map(|t| encode(t, &mut vocab)).collect())
        .collect();
    let splits: Vec<Splits> = blocks
        .iter()
        .zip(trains)
        .map(|(b, train)| Splits {
            train,
            valid: b.valid.iter().map(|t| encode(t, &mut vocab)).collect(),
            test: b.test.iter().map(|t| encode(t, &mut vocab)).collect(),
        })
        .collect();

    let mut schema = Schema::new();
    for (id, token) in vocab.entities.tokens().iter().enumerate() {
        if let Some(old) = corpus.vocab.entities.get(token) {
            for &c in corpus.schema.classes_of(old) {
                schema.assign(id, corpus.schema.class_name(c).expect("class name"));
            }
        }
    }
    Dataset {
        sequence: SnapshotSequence::from_deltas(vocab, splits),
        schema,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{synth_clustered_kg, Growth};
    use crate::kg_store::validate_sequence;

    fn corpus() -> Corpus {
        synth_clustered_kg(3, 30, 0.2, 0.02, 3).unwrap()
    }

    #[test]
    fn builds_valid_sequence_on_target() {
        let spec = BuildSpec::new(BaseSize::Fraction(0.6), 3, Growth::Counts(vec![20, 30, 25]), 9);
        let (ds, manifest) = build_dataset(&corpus(), &spec).unwrap();
        let report = validate_sequence(&ds.sequence);
        assert_eq!(report.num_violations(), 0, "{:?}", report.issues);
        assert_eq!(ds.sequence.len(), 4);
        for c in &manifest.snapshots[1..] {
            assert!(c.new_entities >= 1);
            assert!((c.train as f64 - c.target_train as f64).abs() <= 0.1 * c.target_train as f64);
        }
        for i in 1..4 {
            ds.sequence.delta(i).unwrap().check_coverage().unwrap();
        }
    }

    #[test]
    fn zero_growth_is_a_build_error() {
        let spec = BuildSpec::new(BaseSize::Fraction(0.5), 1, Growth::Counts(vec![0]), 1);
        assert!(matches!(build_dataset(&corpus(), &spec), Err(Error::Build { snapshot: 1, .. })));
    }

    #[test]
    fn unattainable_target_names_snapshot() {
        let spec = BuildSpec::new(BaseSize::Fraction(0.9), 2, Growth::Counts(vec![10, 100_000]), 1);
        match build_dataset(&corpus(), &spec) {
            Err(Error::Build { snapshot, .. }) => assert_eq!(snapshot, 2),
            other => panic!("expected build error, got {:?}", other.map(|r| r.1)),
        }
    }
}
