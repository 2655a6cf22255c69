use crate::error::{Error, Result};
use crate::kg_store::Triple;
use crate::models::{EmbeddingState, ModelKind};

/// Expected TransE position of entity `e` from the new triples it takes
/// part in:
///
/// `e = 1/(|H(e)| + |T(e)|) · (Σ_{(e,r,t)} (t - r) + Σ_{(h,r,e)} (h + r))`
///
/// Only triples whose counterpart entity and relation are already embedded
/// (ids below `old_entities` / `old_relations`) are usable. `head_only`
/// restricts to triples with `e` as head. Returns `Ok(None)` when no usable
/// triple exists.
pub fn model_init_transe(
    kind: ModelKind,
    e: usize,
    new_triples: &[Triple],
    state: &EmbeddingState,
    old_entities: usize,
    old_relations: usize,
    head_only: bool,
) -> Result<Option<Vec<f64>>> {
    if kind != ModelKind::TransE {
        return Err(Error::config(format!(
            "model-based initialization is only defined for TransE, not {kind}"
        )));
    }
    let dim = state.dim();
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for t in new_triples {
        if t.relation >= old_relations {
            continue;
        }
        let r = state.relation(t.relation);
        if t.head == e && t.tail != e && t.tail < old_entities {
            let tail = state.entity(t.tail);
            for k in 0..dim {
                sum[k] += tail[k] - r[k];
            }
            n += 1;
        } else if !head_only && t.tail == e && t.head != e && t.head < old_entities {
            let head = state.entity(t.head);
            for k in 0..dim {
                sum[k] += head[k] + r[k];
            }
            n += 1;
        }
    }
    if n == 0 {
        return Ok(None);
    }
    let inv = n as f64;
    sum.iter_mut().for_each(|x| *x /= inv);
    Ok(Some(sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Matrix;

    // entities: 0 = t/h (1,1) or (1,0), 1 = new; relation 0 = (0,1)
    fn state(known: [f64; 2]) -> EmbeddingState {
        EmbeddingState {
            entities: Matrix::from_rows(2, &[known.to_vec(), vec![99.0, 99.0]]),
            relations: Matrix::from_rows(2, &[vec![0.0, 1.0]]),
            aux: None,
        }
    }

    #[test]
    fn head_of_single_triple() {
        let s = state([1.0, 1.0]);
        let v = model_init_transe(ModelKind::TransE, 1, &[Triple::new(1, 0, 0)], &s, 1, 1, false)
            .unwrap()
            .unwrap();
        assert_eq!(v, vec![1.0, 0.0]);
    }

    #[test]
    fn tail_of_single_triple() {
        let s = state([1.0, 0.0]);
        let v = model_init_transe(ModelKind::TransE, 1, &[Triple::new(0, 0, 1)], &s, 1, 1, false)
            .unwrap()
            .unwrap();
        assert_eq!(v, vec![1.0, 1.0]);
    }

    #[test]
    fn head_only_ignores_tail_triples() {
        let s = state([1.0, 0.0]);
        let v = model_init_transe(ModelKind::TransE, 1, &[Triple::new(0, 0, 1)], &s, 1, 1, true).unwrap();
        assert!(v.is_none());
    }

    #[test]
    fn new_counterparts_are_skipped() {
        let s = state([1.0, 0.0]);
        // counterpart 1 is itself new (old_entities = 1), self loop too
        let v = model_init_transe(ModelKind::TransE, 1, &[Triple::new(1, 0, 1)], &s, 1, 1, false).unwrap();
        assert!(v.is_none());
    }

    #[test]
    fn other_models_are_rejected() {
        let s = state([1.0, 0.0]);
        assert!(matches!(
            model_init_transe(ModelKind::TransH, 1, &[], &s, 1, 1, false),
            Err(Error::Config(_))
        ));
    }
}
