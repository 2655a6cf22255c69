use std::collections::HashSet;

use rand::Rng as _;

use crate::kg_store::Triple;
use crate::rng::Rng;

pub const DEFAULT_MAX_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplerStats {
    /// Corruptions accepted even though they are known true triples,
    /// because every retry collided.
    pub false_negatives: usize,
}

/// Draw `k` corruptions of `t` over entities `0..num_entities`.
///
/// Each corruption replaces the head or the tail (chosen uniformly) with a
/// different, uniformly drawn entity. A corruption found in `known` is
/// redrawn up to `max_retries` times, then accepted and counted.
pub fn negative_sample(
    t: &Triple,
    k: usize,
    num_entities: usize,
    known: &HashSet<Triple>,
    max_retries: usize,
    rng: &mut Rng,
    stats: &mut SamplerStats,
) -> Vec<Triple> {
    assert!(num_entities >= 2, "negative sampling needs at least two entities");
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut attempt = 0;
        loop {
            let corrupt_head = rng.random_bool(0.5);
            let original = if corrupt_head { t.head } else { t.tail };
            // uniform over entities other than the original
            let mut e = rng.random_range(0..num_entities - 1);
            if e >= original {
                e += 1;
            }
            let neg = if corrupt_head {
                Triple::new(e, t.relation, t.tail)
            } else {
                Triple::new(t.head, t.relation, e)
            };
            if !known.contains(&neg) {
                out.push(neg);
                break;
            }
            attempt += 1;
            if attempt > max_retries {
                stats.false_negatives += 1;
                out.push(neg);
                break;
            }
        }
    }
    out
}
