use rand_distr::{Distribution, StandardNormal};

use super::stats::{ClassStat, ClassStats};
use crate::kg_store::ClassId;
use crate::rng::Rng;

/// `v_c + γ·σ_c ⊙ r_c` with `r_c` a fresh standard-normal vector.
pub(crate) fn perturbed(stat: &ClassStat, gamma: f64, rng: &mut Rng) -> Vec<f64> {
    stat.centroid
        .iter()
        .zip(&stat.sigma)
        .map(|(v, s)| {
            let r: f64 = StandardNormal.sample(rng);
            v + gamma * s * r
        })
        .collect()
}

/// Average of the perturbed centroids of the given classes that have
/// statistics:
///
/// `e = 1/|C'| Σ_{c ∈ C'} (v_c + γ·σ_c ⊙ r_c)`
///
/// Classes are visited in ascending id order, drawing one `r_c` per class.
/// Returns `None` when no class of `classes` has statistics.
pub fn schema_vector<'a>(
    classes: impl IntoIterator<Item = &'a ClassId>,
    stats: &ClassStats,
    gamma: f64,
    rng: &mut Rng,
) -> Option<Vec<f64>> {
    let mut sum: Option<Vec<f64>> = None;
    let mut n = 0usize;
    for c in classes {
        let Some(stat) = stats.get(*c) else {
            continue;
        };
        let term = perturbed(stat, gamma, rng);
        match &mut sum {
            None => sum = Some(term),
            Some(acc) => acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t),
        }
        n += 1;
    }
    let mut v = sum?;
    if n > 1 {
        let inv = n as f64;
        v.iter_mut().for_each(|x| *x /= inv);
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::collections::BTreeMap;

    fn stats(entries: &[(ClassId, Vec<f64>, Vec<f64>)]) -> ClassStats {
        ClassStats {
            classes: entries
                .iter()
                .map(|(c, v, s)| {
                    (*c, ClassStat { centroid: v.clone(), sigma: s.clone(), count: 2 })
                })
                .collect::<BTreeMap<_, _>>(),
            global: None,
        }
    }

    #[test]
    fn gamma_zero_returns_centroid() {
        let st = stats(&[(0, vec![0.3, -1.7], vec![0.5, 0.2])]);
        assert_eq!(schema_vector(&[0], &st, 0.0, &mut seeded(1)).unwrap(), vec![0.3, -1.7]);
    }

    #[test]
    fn two_class_average() {
        let st = stats(&[(0, vec![0.0, 0.0], vec![1.0, 1.0]), (1, vec![2.0, 2.0], vec![1.0, 1.0])]);
        assert_eq!(schema_vector(&[0, 1], &st, 0.0, &mut seeded(1)).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn zero_sigma_ignores_rng() {
        let st = stats(&[(0, vec![4.0, 5.0], vec![0.0, 0.0])]);
        for seed in 0..10 {
            assert_eq!(schema_vector(&[0], &st, 0.7, &mut seeded(seed)).unwrap(), vec![4.0, 5.0]);
        }
    }

    #[test]
    fn classes_without_stats_are_ignored() {
        let st = stats(&[(0, vec![1.0], vec![0.0])]);
        assert_eq!(schema_vector(&[0, 9], &st, 0.0, &mut seeded(1)).unwrap(), vec![1.0]);
        assert!(schema_vector(&[9], &st, 0.0, &mut seeded(1)).is_none());
    }
}
