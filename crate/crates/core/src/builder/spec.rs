use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Size of snapshot 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseSize {
    /// Exact number of base train triples.
    Count(usize),
    /// Fraction of the corpus used by the base snapshot (all splits).
    Fraction(f64),
}

/// Per-snapshot growth targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// Train triples added by snapshot `1..=n`, one entry per snapshot.
    Counts(Vec<usize>),
    /// Every snapshot adds this percentage of the base train count.
    Percent(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSpec {
    pub base: BaseSize,
    /// Number of incremental snapshots after the base.
    pub n_snapshots: usize,
    pub growth: Growth,
    /// `(train, valid, test)`, summing to 1.
    pub split: (f64, f64, f64),
    pub seed: u64,
}

impl BuildSpec {
    pub fn new(base: BaseSize, n_snapshots: usize, growth: Growth, seed: u64) -> Self {
        BuildSpec {
            base,
            n_snapshots,
            growth,
            split: (0.8, 0.1, 0.1),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_snapshots == 0 {
            return Err(Error::config("n_snapshots must be at least 1"));
        }
        let (a, b, c) = self.split;
        if !(a > 0.0 && b >= 0.0 && c >= 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "split ratios ({a}, {b}, {c}) must be non-negative with a positive train share and sum to 1"
            )));
        }
        match self.base {
            BaseSize::Count(0) => return Err(Error::config("base count must be positive")),
            BaseSize::Fraction(f) if !(f > 0.0 && f < 1.0) => {
                return Err(Error::config(format!("base fraction {f} must lie in (0, 1)")))
            }
            _ => {}
        }
        match &self.growth {
            Growth::Counts(c) if c.len() != self.n_snapshots => Err(Error::config(format!(
                "{} growth targets given for {} snapshots",
                c.len(),
                self.n_snapshots
            ))),
            Growth::Counts(c) => match c.iter().position(|&g| g == 0) {
                Some(i) => Err(Error::Build {
                    snapshot: i + 1,
                    message: "growth target of 0 triples cannot introduce new entities".into(),
                }),
                None => Ok(()),
            },
            Growth::Percent(p) if p.is_nan() || *p <= 0.0 || p.is_infinite() => Err(Error::Build {
                snapshot: 1,
                message: format!("growth of {p}% cannot introduce new entities"),
            }),
            Growth::Percent(_) => Ok(()),
        }
    }

    /// Train-triple target for each increment, given the base train count.
    pub fn growth_targets(&self, base_train: usize) -> Vec<usize> {
        match &self.growth {
            Growth::Counts(c) => c.clone(),
            Growth::Percent(p) => {
                let g = ((p / 100.0) * base_train as f64).round().max(1.0) as usize;
                vec![g; self.n_snapshots]
            }
        }
    }
}
