//! Closed-form scores and their analytic gradients. Higher scores mean more
//! plausible triples.
//!
//! | model    | score                                  |
//! |----------|----------------------------------------|
//! | TransE   | `-‖h + r - t‖_p`                       |
//! | TransH   | `-‖h⊥ + r - t⊥‖_p`, `x⊥ = x - (uᵀx)u`  |
//! | DistMult | `Σ h_k r_k t_k`                        |
//! | RotatE   | `-‖h ∘ r - t‖₂` over complex pairs     |
//!
//! For TransH the stored normal `w` is normalized on the fly, `u = w/‖w‖`,
//! and the gradient is taken with respect to `w`. At non-differentiable
//! points (a zero coordinate under L1, a zero residual under L2) the
//! subgradient 0 is used.

use super::{EmbeddingState, Model, ModelKind, Norm};
use crate::kg_store::Triple;

/// `∂score/∂h`, `∂score/∂r`, `∂score/∂t`, and `∂score/∂w` for TransH.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGradients {
    pub head: Vec<f64>,
    pub relation: Vec<f64>,
    pub tail: Vec<f64>,
    pub aux: Option<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `-‖δ‖_p` and its gradient with respect to `δ`.
fn neg_distance(delta: &[f64], norm: Norm, want_grad: bool) -> (f64, Vec<f64>) {
    match norm {
        Norm::L1 => {
            let s = -delta.iter().map(|x| x.abs()).sum::<f64>();
            let g = if want_grad {
                delta.iter().map(|&x| -sign(x)).collect()
            } else {
                Vec::new()
            };
            (s, g)
        }
        Norm::L2 => {
            let n = norm2(delta);
            let g = if !want_grad {
                Vec::new()
            } else if n > 0.0 {
                delta.iter().map(|&x| -x / n).collect()
            } else {
                vec![0.0; delta.len()]
            };
            (-n, g)
        }
    }
}

impl Model {
    /// Score of triple `t` under `state`.
    pub fn score(&self, state: &EmbeddingState, t: &Triple) -> f64 {
        self.score_vectors(
            state.entity(t.head),
            state.relation(t.relation),
            state.entity(t.tail),
            state.aux_row(t.relation),
        )
    }

    /// Score from raw vectors.
    ///
    /// Panics on mismatched dimensions or a missing TransH normal.
    pub fn score_vectors(&self, h: &[f64], r: &[f64], t: &[f64], w: Option<&[f64]>) -> f64 {
        self.eval(h, r, t, w, false).0
    }

    pub fn score_gradients(&self, state: &EmbeddingState, t: &Triple) -> ScoreGradients {
        self.gradient_vectors(
            state.entity(t.head),
            state.relation(t.relation),
            state.entity(t.tail),
            state.aux_row(t.relation),
        )
    }

    pub fn gradient_vectors(
        &self,
        h: &[f64],
        r: &[f64],
        t: &[f64],
        w: Option<&[f64]>,
    ) -> ScoreGradients {
        self.eval(h, r, t, w, true)
            .1
            .expect("gradient requested")
    }

    fn eval(
        &self,
        h: &[f64],
        r: &[f64],
        t: &[f64],
        w: Option<&[f64]>,
        want_grad: bool,
    ) -> (f64, Option<ScoreGradients>) {
        let d = h.len();
        assert!(
            r.len() == d && t.len() == d,
            "dimension mismatch: h={}, r={}, t={}",
            d,
            r.len(),
            t.len()
        );
        match self.kind {
            ModelKind::TransE => {
                let delta: Vec<f64> = (0..d).map(|k| h[k] + r[k] - t[k]).collect();
                let (s, g) = neg_distance(&delta, self.norm, want_grad);
                let grads = want_grad.then(|| ScoreGradients {
                    head: g.clone(),
                    relation: g.clone(),
                    tail: g.iter().map(|x| -x).collect(),
                    aux: None,
                });
                (s, grads)
            }
            ModelKind::TransH => {
                let w = w.expect("TransH requires a hyperplane normal");
                assert_eq!(w.len(), d, "dimension mismatch: w={}", w.len());
                let wn = norm2(w);
                assert!(wn > 0.0, "TransH normal has zero length");
                let u: Vec<f64> = w.iter().map(|x| x / wn).collect();
                let x: Vec<f64> = (0..d).map(|k| h[k] - t[k]).collect();
                let ux = dot(&u, &x);
                let delta: Vec<f64> = (0..d).map(|k| x[k] - ux * u[k] + r[k]).collect();
                let (s, g) = neg_distance(&delta, self.norm, want_grad);
                let grads = want_grad.then(|| {
                    let ug = dot(&u, &g);
                    // (I - uuᵀ) g
                    let gx: Vec<f64> = (0..d).map(|k| g[k] - ug * u[k]).collect();
                    // ∂/∂u = -(g·u) x - (u·x) g, then through u = w/‖w‖
                    let gu: Vec<f64> = (0..d).map(|k| -ug * x[k] - ux * g[k]).collect();
                    let ugu = dot(&u, &gu);
                    let gw: Vec<f64> = (0..d).map(|k| (gu[k] - ugu * u[k]) / wn).collect();
                    ScoreGradients {
                        head: gx.clone(),
                        relation: g.clone(),
                        tail: gx.iter().map(|v| -v).collect(),
                        aux: Some(gw),
                    }
                });
                (s, grads)
            }
            ModelKind::DistMult => {
                let s = (0..d).map(|k| h[k] * r[k] * t[k]).sum();
                let grads = want_grad.then(|| ScoreGradients {
                    head: (0..d).map(|k| r[k] * t[k]).collect(),
                    relation: (0..d).map(|k| h[k] * t[k]).collect(),
                    tail: (0..d).map(|k| h[k] * r[k]).collect(),
                    aux: None,
                });
                (s, grads)
            }
            ModelKind::RotatE => {
                assert!(d.is_multiple_of(2), "RotatE needs an even dimension");
                let mut delta = vec![0.0; d];
                for k in (0..d).step_by(2) {
                    let (a, b) = (h[k], h[k + 1]);
                    let (c, e) = (r[k], r[k + 1]);
                    delta[k] = a * c - b * e - t[k];
                    delta[k + 1] = a * e + b * c - t[k + 1];
                }
                let (s, g) = neg_distance(&delta, Norm::L2, want_grad);
                let grads = want_grad.then(|| {
                    let mut gh = vec![0.0; d];
                    let mut gr = vec![0.0; d];
                    for k in (0..d).step_by(2) {
                        let (a, b) = (h[k], h[k + 1]);
                        let (c, e) = (r[k], r[k + 1]);
                        let (gre, gim) = (g[k], g[k + 1]);
                        gh[k] = gre * c + gim * e;
                        gh[k + 1] = -gre * e + gim * c;
                        gr[k] = gre * a + gim * b;
                        gr[k + 1] = -gre * b + gim * a;
                    }
                    ScoreGradients {
                        head: gh,
                        relation: gr,
                        tail: g.iter().map(|x| -x).collect(),
                        aux: None,
                    }
                });
                (s, grads)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transe(norm: Norm) -> Model {
        Model::new(ModelKind::TransE, norm)
    }

    #[test]
    fn transe_exact_translation_scores_zero() {
        let s = transe(Norm::L2).score_vectors(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], None);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn distmult_trilinear() {
        let m = Model::new(ModelKind::DistMult, Norm::L1);
        assert_eq!(m.score_vectors(&[1.0, 2.0], &[1.0, 1.0], &[2.0, 1.0], None), 4.0);
        let g = m.gradient_vectors(&[1.0, 2.0], &[3.0, 5.0], &[2.0, 7.0], None);
        assert_eq!(g.head, vec![6.0, 35.0]);
    }

    #[test]
    fn transh_with_orthogonal_normal_matches_transe() {
        let h = [1.0, 2.0, 0.0];
        let r = [0.5, -1.0, 0.0];
        let t = [3.0, 1.0, 0.0];
        let w = [0.0, 0.0, 2.0];
        for norm in [Norm::L1, Norm::L2] {
            let a = Model::new(ModelKind::TransH, norm).score_vectors(&h, &r, &t, Some(&w));
            let b = transe(norm).score_vectors(&h, &r, &t, None);
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn transe_l2_gradient_is_negative_unit_residual() {
        let h = [1.0, 2.0];
        let r = [0.0, 0.0];
        let t = [-2.0, -2.0];
        // δ = (3, 4), ‖δ‖ = 5
        let g = transe(Norm::L2).gradient_vectors(&h, &r, &t, None);
        assert_eq!(g.head, vec![-0.6, -0.8]);
        assert_eq!(g.tail, vec![0.6, 0.8]);
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        for norm in [Norm::L1, Norm::L2] {
            let g = transe(norm).gradient_vectors(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], None);
            assert_eq!(g.head, vec![0.0, 0.0]);
            assert_eq!(g.relation, vec![0.0, 0.0]);
        }
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn dimension_mismatch_panics() {
        transe(Norm::L1).score_vectors(&[1.0, 0.0], &[0.0], &[1.0, 1.0], None);
    }

    #[test]
    fn rotate_rotation_by_i() {
        // h = 1 + 0i, r = i, t = i → exact
        let m = Model::new(ModelKind::RotatE, Norm::L2);
        assert_eq!(m.score_vectors(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0], None), 0.0);
        assert!(m.check_dim(3).is_err());
    }
}
