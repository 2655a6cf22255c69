use super::{EmbeddingState, Gradients};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Default::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Dense Adam over every parameter block of an [`EmbeddingState`].
///
/// Moments are kept in state-shaped buffers; rows added to the state after
/// construction start with zero moments.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    step: i32,
    m: EmbeddingState,
    v: EmbeddingState,
}

impl Adam {
    pub fn new(config: AdamConfig, state: &EmbeddingState) -> Self {
        Adam {
            config,
            step: 0,
            m: EmbeddingState::zeros_like(state),
            v: EmbeddingState::zeros_like(state),
        }
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    pub fn step(&mut self, state: &mut EmbeddingState, grads: &Gradients) {
        let (ne, nr) = (state.num_entities(), state.num_relations());
        if self.m.num_entities() != ne || self.m.num_relations() != nr {
            self.m.resize(ne, nr);
            self.v.resize(ne, nr);
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let c1 = 1.0 - beta1.powi(self.step);
        let c2 = 1.0 - beta2.powi(self.step);
        let blocks = state
            .blocks_mut()
            .into_iter()
            .zip(grads.blocks())
            .zip(self.m.blocks_mut().into_iter().zip(self.v.blocks_mut()));
        for ((p, g), (m, v)) in blocks {
            let p = p.as_mut_slice();
            let g = g.as_slice();
            let m = m.as_mut_slice();
            let v = v.as_mut_slice();
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}
