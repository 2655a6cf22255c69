//! Scoring models, their gradients, negative sampling, the margin ranking
//! loss and the Adam optimizer.

mod adam;
mod checkpoint;
mod loss;
mod sampling;
mod scoring;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{parse_checkpoint, read_checkpoint, render_checkpoint, write_checkpoint};
pub use loss::{accumulate, batch_loss, margin_loss, Pair};
pub use sampling::{negative_sample, SamplerStats, DEFAULT_MAX_RETRIES};
pub use scoring::ScoreGradients;
pub use state::{init_aux, init_relation, xavier_init, EmbeddingState, Gradients, Matrix};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    TransE,
    TransH,
    DistMult,
    RotatE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::TransE,
        ModelKind::TransH,
        ModelKind::DistMult,
        ModelKind::RotatE,
    ];

    pub fn has_aux(self) -> bool {
        matches!(self, ModelKind::TransH)
    }

    pub fn is_translational(self) -> bool {
        !matches!(self, ModelKind::DistMult)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::TransE => "TransE",
            ModelKind::TransH => "TransH",
            ModelKind::DistMult => "DistMult",
            ModelKind::RotatE => "RotatE",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transe" => Ok(ModelKind::TransE),
            "transh" => Ok(ModelKind::TransH),
            "distmult" => Ok(ModelKind::DistMult),
            "rotate" => Ok(ModelKind::RotatE),
            other => Err(Error::config(format!("unknown model `{other}`"))),
        }
    }
}

/// Norm order for translational distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn from_order(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Norm::L1),
            2 => Ok(Norm::L2),
            p => Err(Error::config(format!("norm order must be 1 or 2, got {p}"))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Norm::L1 => 1,
            Norm::L2 => 2,
        }
    }
}

/// A scoring model: kind plus its fixed hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Model {
    pub kind: ModelKind,
    /// Used by TransE and TransH. RotatE always uses the Euclidean modulus.
    pub norm: Norm,
}

impl Model {
    pub fn new(kind: ModelKind, norm: Norm) -> Self {
        Model { kind, norm }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::config("embedding dimension must be positive"));
        }
        if self.kind == ModelKind::RotatE && !dim.is_multiple_of(2) {
            return Err(Error::config(format!(
                "RotatE needs an even dimension, got {dim}"
            )));
        }
        Ok(())
    }

    /// Fresh state with every entity and relation initialized from `rng`.
    pub fn init_state(
        &self,
        num_entities: usize,
        num_relations: usize,
        dim: usize,
        rng: &mut Rng,
    ) -> Result<EmbeddingState> {
        self.check_dim(dim)?;
        let mut state = EmbeddingState::zeros(0, 0, dim, self.kind.has_aux());
        for _ in 0..num_entities {
            state.entities.push_row(&xavier_init(dim, rng));
        }
        for _ in 0..num_relations {
            self.push_relation(&mut state, rng);
        }
        Ok(state)
    }

    /// Append one randomly initialized relation (and its aux row).
    pub fn push_relation(&self, state: &mut EmbeddingState, rng: &mut Rng) {
        let dim = state.dim();
        state.relations.push_row(&init_relation(self.kind, dim, rng));
        if let Some(aux) = &mut state.aux {
            aux.push_row(&init_aux(dim, rng));
        }
    }

    /// Restore model constraints after a parameter update: unit-modulus
    /// RotatE rotations and unit TransH normals.
    pub fn project(&self, state: &mut EmbeddingState) {
        match self.kind {
            ModelKind::RotatE => {
                for pair in state.relations.as_mut_slice().chunks_exact_mut(2) {
                    let m = (pair[0] * pair[0] + pair[1] * pair[1]).sqrt();
                    if m > 0.0 {
                        pair[0] /= m;
                        pair[1] /= m;
                    } else {
                        pair[0] = 1.0;
                        pair[1] = 0.0;
                    }
                }
            }
            ModelKind::TransH => {
                if let Some(aux) = &mut state.aux {
                    let dim = aux.dim();
                    for row in aux.as_mut_slice().chunks_exact_mut(dim) {
                        state::normalize(row);
                    }
                }
            }
            _ => {}
        }
    }
}
