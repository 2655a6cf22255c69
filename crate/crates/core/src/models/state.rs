use rand::Rng as _;
use rand_distr::{Distribution, Uniform};

use super::ModelKind;
use crate::rng::Rng;

/// Row-major dense matrix of `rows × dim` reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Matrix {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "row dimension mismatch");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            dim,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim, "row dimension mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// Grow to `rows` rows, filling with zeros.
    pub fn resize_rows(&mut self, rows: usize) {
        self.data.resize(rows * self.dim, 0.0);
        self.rows = rows;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1)).take(self.rows)
    }
}

/// Entity and relation embeddings, plus per-relation auxiliary vectors for
/// models that need them (TransH hyperplane normals).
///
/// The same container doubles as a gradient buffer and as optimizer moment
/// storage; see [`EmbeddingState::zeros_like`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState {
    pub entities: Matrix,
    pub relations: Matrix,
    pub aux: Option<Matrix>,
}

pub type Gradients = EmbeddingState;

impl EmbeddingState {
    pub fn zeros(num_entities: usize, num_relations: usize, dim: usize, with_aux: bool) -> Self {
        EmbeddingState {
            entities: Matrix::zeros(num_entities, dim),
            relations: Matrix::zeros(num_relations, dim),
            aux: with_aux.then(|| Matrix::zeros(num_relations, dim)),
        }
    }

    pub fn zeros_like(other: &EmbeddingState) -> Self {
        Self::zeros(
            other.num_entities(),
            other.num_relations(),
            other.dim(),
            other.aux.is_some(),
        )
    }

    pub fn dim(&self) -> usize {
        self.entities.dim()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.rows()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.rows()
    }

    pub fn entity(&self, e: usize) -> &[f64] {
        self.entities.row(e)
    }

    pub fn relation(&self, r: usize) -> &[f64] {
        self.relations.row(r)
    }

    pub fn aux_row(&self, r: usize) -> Option<&[f64]> {
        self.aux.as_ref().map(|m| m.row(r))
    }

    /// Parameter blocks in a fixed order: entities, relations, aux.
    pub fn blocks(&self) -> Vec<&Matrix> {
        let mut v = vec![&self.entities, &self.relations];
        if let Some(a) = &self.aux {
            v.push(a);
        }
        v
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Matrix> {
        let mut v = vec![&mut self.entities, &mut self.relations];
        if let Some(a) = &mut self.aux {
            v.push(a);
        }
        v
    }

    /// Grow every block to the given row counts with zero rows.
    pub fn resize(&mut self, num_entities: usize, num_relations: usize) {
        self.entities.resize_rows(num_entities);
        self.relations.resize_rows(num_relations);
        if let Some(a) = &mut self.aux {
            a.resize_rows(num_relations);
        }
    }

    pub fn clear(&mut self) {
        for b in self.blocks_mut() {
            b.fill(0.0);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|b| b.as_slice().iter().all(|v| v.is_finite()))
    }
}

/// Xavier-uniform vector with `fan_in = fan_out = dim`: components are
/// uniform on `[-sqrt(6 / 2d), sqrt(6 / 2d)]`.
pub fn xavier_init(dim: usize, rng: &mut Rng) -> Vec<f64> {
    assert!(dim >= 1, "dimension must be positive");
    let bound = (6.0 / (2.0 * dim as f64)).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    (0..dim).map(|_| dist.sample(rng)).collect()
}

/// Initial relation vector for `kind`. RotatE relations are unit-modulus
/// rotations with phases uniform on `[-pi, pi)`.
pub fn init_relation(kind: ModelKind, dim: usize, rng: &mut Rng) -> Vec<f64> {
    match kind {
        ModelKind::RotatE => {
            let mut v = vec![0.0; dim];
            for pair in v.chunks_exact_mut(2) {
                let phase: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                pair[0] = phase.cos();
                pair[1] = phase.sin();
            }
            v
        }
        _ => xavier_init(dim, rng),
    }
}

/// Initial hyperplane normal (unit length).
pub fn init_aux(dim: usize, rng: &mut Rng) -> Vec<f64> {
    let mut v = xavier_init(dim, rng);
    normalize(&mut v);
    v
}

pub(crate) fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
