use rand::Rng as _;

use crate::error::{Error, Result};
use crate::kg_store::{Schema, Triple, TripleSet, Vocabulary};
use crate::rng::{stream_rng, Stream};

/// A flat triple corpus with entity classes, before snapshot splitting.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub vocab: Vocabulary,
    pub triples: TripleSet,
    pub schema: Schema,
}

/// Generate a class-structured KG.
///
/// Entities `c<k>_e<j>` belong to exactly one class `class<k>` and sit on a
/// ring inside their class. Each entity links to its nearest ring
/// neighbours, with the window sized so that the fraction of linked ordered
/// intra-class pairs is about `intra_density`. Ordered pairs across classes
/// are linked independently with probability `inter_density`. The relation
/// is determined by the class pair (`rel_<a>_<b>`), so class membership
/// predicts both neighbourhood and relation usage, and the ring gives
/// within-class links learnable structure.
pub fn synth_clustered_kg(
    n_classes: usize,
    entities_per_class: usize,
    intra_density: f64,
    inter_density: f64,
    seed: u64,
) -> Result<Corpus> {
    if n_classes < 2 {
        return Err(Error::config("at least two classes are required"));
    }
    if entities_per_class == 0 {
        return Err(Error::config("entities_per_class must be positive"));
    }
    for (name, d) in [("intra_density", intra_density), ("inter_density", inter_density)] {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::config(format!("{name} = {d} must lie in [0, 1]")));
        }
    }

    let mut corpus = Corpus::default();
    let n = n_classes * entities_per_class;
    let class_of = |e: usize| e / entities_per_class;
    for e in 0..n {
        let id = corpus
            .vocab
            .entities
            .intern(&format!("c{}_e{}", class_of(e), e % entities_per_class));
        corpus.schema.assign(id, &format!("class{}", class_of(e)));
    }
    for a in 0..n_classes {
        for b in 0..n_classes {
            corpus.vocab.relations.intern(&format!("rel_{a}_{b}"));
        }
    }

    let m = entities_per_class;
    let window = ((intra_density * (m - 1) as f64) / 2.0).round() as usize;
    let ring_distance = |a: usize, b: usize| {
        let d = (a % m).abs_diff(b % m);
        d.min(m - d)
    };
    let mut rng = stream_rng(seed, Stream::Synth, 0);
    for h in 0..n {
        for t in 0..n {
            if h == t {
                continue;
            }
            let (ch, ct) = (class_of(h), class_of(t));
            let linked = if ch == ct {
                ring_distance(h, t) <= window
            } else {
                rng.random::<f64>() < inter_density
            };
            if linked {
                corpus.triples.push(Triple::new(h, ch * n_classes + ct, t));
            }
        }
    }
    Ok(corpus)
}
