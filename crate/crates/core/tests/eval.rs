mod common;

use std::collections::HashSet;

use kgec_core::continual::train_base;
use kgec_core::eval::{evaluate_split, rank_query, split_ranks, FilterIndex, Metrics, Slot};
use kgec_core::models::Matrix;
use kgec_core::{EmbeddingState, Model, ModelKind, Norm, Triple};
use proptest::prelude::*;

const N_ENT: usize = 12;
const N_REL: usize = 3;
const DIM: usize = 3;

fn state_from(values: &[i8]) -> EmbeddingState {
    let rows = |offset: usize, n: usize| -> Vec<Vec<f64>> {
        (0..n).map(|r| (0..DIM).map(|k| values[offset + r * DIM + k] as f64 / 2.0).collect()).collect()
    };
    EmbeddingState {
        entities: Matrix::from_rows(DIM, &rows(0, N_ENT)),
        relations: Matrix::from_rows(DIM, &rows(N_ENT * DIM, N_REL)),
        aux: None,
    }
}

fn arb_state() -> impl Strategy<Value = EmbeddingState> {
    // half-integer coordinates keep ties common
    prop::collection::vec(-2i8..=2, (N_ENT + N_REL) * DIM).prop_map(|v| state_from(&v))
}

fn arb_triples(max: usize) -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec((0..N_ENT, 0..N_REL, 0..N_ENT).prop_map(|(h, r, t)| Triple::new(h, r, t)), 1..max)
}

fn model() -> Model {
    Model::new(ModelKind::TransE, Norm::L1)
}

proptest! {
    #[test]
    fn ranks_ignore_entity_numbering(
        state in arb_state(),
        triples in arb_triples(20),
        perm in Just((0..N_ENT).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let mut rows = vec![vec![0.0; DIM]; N_ENT];
        for (old, &new) in perm.iter().enumerate() {
            rows[new] = state.entity(old).to_vec();
        }
        let relabelled = EmbeddingState { entities: Matrix::from_rows(DIM, &rows), ..state.clone() };
        let map = |t: &Triple| Triple::new(perm[t.head], t.relation, perm[t.tail]);
        let moved: Vec<Triple> = triples.iter().map(map).collect();
        let f1 = FilterIndex::new(&triples);
        let f2 = FilterIndex::new(&moved);
        let (a, _) = split_ranks(&model(), &state, &triples, Some(&f1), false);
        let (b, _) = split_ranks(&model(), &relabelled, &moved, Some(&f2), false);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn filtering_never_worsens_a_rank(state in arb_state(), known in arb_triples(40)) {
        let filter = FilterIndex::new(&known);
        for t in &known {
            for slot in [Slot::Head, Slot::Tail] {
                let raw = rank_query(&model(), &state, t, slot, None);
                let filtered = rank_query(&model(), &state, t, slot, Some(&filter));
                prop_assert!(filtered <= raw);
                prop_assert!(filtered >= 1.0 && raw <= N_ENT as f64);
            }
        }
    }

    #[test]
    fn metrics_stay_in_bounds(state in arb_state(), test in arb_triples(30)) {
        let m = evaluate_split(&model(), &state, &test, None, false);
        prop_assert_eq!(m.queries, 2 * test.len());
        prop_assert!(m.mrr > 0.0 && m.mrr <= 1.0);
        prop_assert!(m.mrr >= 1.0 / N_ENT as f64);
        prop_assert!(0.0 <= m.hits_at_1 && m.hits_at_1 <= m.hits_at_3);
        prop_assert!(m.hits_at_3 <= m.hits_at_10 && m.hits_at_10 <= 1.0);
    }

    #[test]
    fn disjoint_union_is_query_weighted_mean(
        state in arb_state(),
        a in arb_triples(20),
        b in arb_triples(20),
    ) {
        let a_set: HashSet<Triple> = a.iter().copied().collect();
        let b: Vec<Triple> = b.into_iter().filter(|t| !a_set.contains(t)).collect();
        let union: Vec<Triple> = a.iter().chain(&b).copied().collect();
        let filter = FilterIndex::new(&union);
        let eval = |s: &[Triple]| evaluate_split(&model(), &state, s, Some(&filter), false);
        let merged = Metrics::merge(&[eval(&a), eval(&b)]);
        let whole = eval(&union);
        prop_assert_eq!(merged.queries, whole.queries);
        prop_assert!((merged.mrr - whole.mrr).abs() < 1e-12);
        prop_assert!((merged.hits_at_1 - whole.hits_at_1).abs() < 1e-12);
        prop_assert!((merged.hits_at_3 - whole.hits_at_3).abs() < 1e-12);
        prop_assert!((merged.hits_at_10 - whole.hits_at_10).abs() < 1e-12);
    }
}

#[test]
fn trained_classes_cluster() {
    let ds = common::clustered_fixture();
    let config = common::fixture_train(11);
    let (state, _) = train_base(&Model::new(ModelKind::TransE, Norm::L2), &ds.sequence, &config).unwrap();
    let schema = &ds.schema;
    let embedded: Vec<usize> = ds.sequence.snapshot(0).entities.iter().copied().collect();
    let dist = |a: usize, b: usize| -> f64 {
        state.entity(a).iter().zip(state.entity(b)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };
    let (mut intra, mut inter) = ((0.0, 0usize), (0.0, 0usize));
    for (i, &a) in embedded.iter().enumerate() {
        for &b in &embedded[i + 1..] {
            let acc = if schema.classes_of(a) == schema.classes_of(b) { &mut intra } else { &mut inter };
            acc.0 += dist(a, b);
            acc.1 += 1;
        }
    }
    let intra = intra.0 / intra.1 as f64;
    let inter = inter.0 / inter.1 as f64;
    assert!(intra < inter, "intra {intra} vs inter {inter}");
}
