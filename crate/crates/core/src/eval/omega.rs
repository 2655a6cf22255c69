use crate::error::{Error, Result};

/// Metric kind stored in an [`AlphaMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Mrr,
    Hits1,
    Hits3,
    Hits10,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [MetricKind::Mrr, MetricKind::Hits1, MetricKind::Hits3, MetricKind::Hits10];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Mrr => "mrr",
            MetricKind::Hits1 => "hits@1",
            MetricKind::Hits3 => "hits@3",
            MetricKind::Hits10 => "hits@10",
        }
    }

    pub fn of(self, m: &super::Metrics) -> f64 {
        match self {
            MetricKind::Mrr => m.mrr,
            MetricKind::Hits1 => m.hits_at_1,
            MetricKind::Hits3 => m.hits_at_3,
            MetricKind::Hits10 => m.hits_at_10,
        }
    }
}

/// `α[i][j]`: metric on test set `i` after training through snapshot `j`,
/// defined for `j >= i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMatrix {
    pub metric: MetricKind,
    size: usize,
    values: Vec<Option<f64>>,
}

impl AlphaMatrix {
    /// Matrix for snapshots `0..=num_increments`.
    pub fn new(metric: MetricKind, num_increments: usize) -> Self {
        let size = num_increments + 1;
        AlphaMatrix {
            metric,
            size,
            values: vec![None; size * size],
        }
    }

    pub fn num_increments(&self) -> usize {
        self.size - 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i > j || j >= self.size {
            return Err(Error::contract(format!("alpha[{i}][{j}] is outside the lower triangle")));
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::contract(format!("alpha[{i}][{j}] = {value} is outside [0, 1]")));
        }
        self.values[i * self.size + j] = Some(value);
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        if i >= self.size || j >= self.size {
            return None;
        }
        self.values[i * self.size + j]
    }

    fn require(&self, i: usize, j: usize) -> Result<f64> {
        self.get(i, j)
            .ok_or_else(|| Error::UndefinedMetric(format!("alpha[{i}][{j}] has not been recorded")))
    }

    /// Number of recorded entries.
    pub fn filled(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// `(i, j, value)` for every recorded entry, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(k, v)| v.map(|v| (k / self.size, k % self.size, v)))
    }
}

/// Retention of base knowledge: `1/N Σ_{j=1..N} α[0][j] / α[0][0]`.
pub fn omega_base(alpha: &AlphaMatrix) -> Result<f64> {
    let n = alpha.num_increments();
    if n == 0 {
        return Err(Error::UndefinedMetric("omega_base needs at least one increment".into()));
    }
    let base = alpha.require(0, 0)?;
    if base == 0.0 {
        return Err(Error::UndefinedMetric("omega_base is undefined when alpha[0][0] = 0".into()));
    }
    let mut sum = 0.0;
    for j in 1..=n {
        sum += alpha.require(0, j)? / base;
    }
    Ok(sum / n as f64)
}

/// Acquisition of new knowledge: `1/N Σ_{i=1..N} α[i][i]`.
pub fn omega_new(alpha: &AlphaMatrix) -> Result<f64> {
    let n = alpha.num_increments();
    if n == 0 {
        return Err(Error::UndefinedMetric("omega_new needs at least one increment".into()));
    }
    let mut sum = 0.0;
    for i in 1..=n {
        sum += alpha.require(i, i)?;
    }
    Ok(sum / n as f64)
}
