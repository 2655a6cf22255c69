//! Two-sided Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped; tied absolute differences receive average
//! ranks. For up to [`EXACT_MAX_N`] non-zero differences the p-value comes
//! from the exact permutation distribution of `W+` (conditional on the
//! observed ranks, so ties are handled exactly); above that a normal
//! approximation with tie and continuity corrections is used.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const EXACT_MAX_N: usize = 25;
pub const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Sum of ranks of positive differences `a - b`.
    pub w_plus: f64,
    /// Non-zero differences used.
    pub n: usize,
    pub p_value: f64,
    pub exact: bool,
}

/// Average ranks (1-based) of `values`, ties sharing their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Signed differences, their ranks, and the statistic.
fn prepare(a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < MIN_PAIRS {
        return Err(Error::contract(format!(
            "at least {MIN_PAIRS} pairs are required, got {}",
            a.len()
        )));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::DegenerateSample("all paired differences are zero".into()));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    Ok((diffs, ranks, w_plus))
}

/// Exact two-sided p-value of `w_plus` given the ranks in play.
pub fn exact_p_value(ranks: &[f64], w_plus: f64) -> f64 {
    // Doubled average ranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let w2 = (2.0 * w_plus).round() as usize;
    let all = (1u64 << ranks.len()) as f64;
    let le: u64 = counts[..=w2.min(total)].iter().sum();
    let ge: u64 = counts[w2.min(total + 1)..].iter().sum();
    (2.0 * (le.min(ge) as f64) / all).min(1.0)
}

fn normal_p_value(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let diff = w_plus - mean;
    let z = (diff.abs() - 0.5).max(0.0) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("valid parameters");
    (2.0 * (1.0 - std_normal.cdf(z))).min(1.0)
}

/// Two-sided signed-rank test of `a` against `b`.
pub fn wilcoxon_paired(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    let (_, ranks, w_plus) = prepare(a, b)?;
    let n = ranks.len();
    let exact = n <= EXACT_MAX_N;
    let p_value = if exact {
        exact_p_value(&ranks, w_plus)
    } else {
        normal_p_value(&ranks, w_plus)
    };
    Ok(WilcoxonResult {
        w_plus,
        n,
        p_value,
        exact,
    })
}
