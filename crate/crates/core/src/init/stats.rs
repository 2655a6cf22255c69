use std::collections::BTreeMap;

use crate::kg_store::{ClassId, Schema};
use crate::models::EmbeddingState;

/// Centroid, per-dimension population standard deviation and member count
/// of a set of embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStat {
    pub centroid: Vec<f64>,
    pub sigma: Vec<f64>,
    pub count: usize,
}

/// Welford accumulator over d-vectors.
#[derive(Debug, Clone)]
struct Running {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Running {
    fn new(dim: usize) -> Self {
        Running {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for k in 0..x.len() {
            let d = x[k] - self.mean[k];
            self.mean[k] += d / n;
            self.m2[k] += d * (x[k] - self.mean[k]);
        }
    }

    fn finish(self) -> ClassStat {
        let n = self.count as f64;
        ClassStat {
            sigma: self.m2.iter().map(|m| (m / n).max(0.0).sqrt()).collect(),
            centroid: self.mean,
            count: self.count,
        }
    }
}

/// Per-class statistics of the embedded entities, plus the same statistics
/// over all embedded entities (used as the class-less fallback).
///
/// Classes without embedded members are absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassStats {
    pub classes: BTreeMap<ClassId, ClassStat>,
    pub global: Option<ClassStat>,
}

impl ClassStats {
    pub fn get(&self, class: ClassId) -> Option<&ClassStat> {
        self.classes.get(&class)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Class centroids and spreads over `embedded` entities only.
pub fn compute_class_stats(
    state: &EmbeddingState,
    schema: &Schema,
    embedded: impl IntoIterator<Item = usize>,
) -> ClassStats {
    let dim = state.dim();
    let mut per_class: BTreeMap<ClassId, Running> = BTreeMap::new();
    let mut global = Running::new(dim);
    for e in embedded {
        let v = state.entity(e);
        global.push(v);
        for &c in schema.classes_of(e) {
            per_class.entry(c).or_insert_with(|| Running::new(dim)).push(v);
        }
    }
    ClassStats {
        classes: per_class.into_iter().map(|(c, r)| (c, r.finish())).collect(),
        global: (global.count > 0).then(|| global.finish()),
    }
}
