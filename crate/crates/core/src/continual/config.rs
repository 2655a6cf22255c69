use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continual update strategy applied after the base snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContinualKind {
    /// Fine-tuning on the new triples only.
    Ft,
    /// Elastic weight consolidation.
    Ewc,
    /// Episodic memory replay.
    Emr,
}

impl fmt::Display for ContinualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContinualKind::Ft => "ft",
            ContinualKind::Ewc => "ewc",
            ContinualKind::Emr => "emr",
        })
    }
}

impl FromStr for ContinualKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ft" => Ok(ContinualKind::Ft),
            "ewc" => Ok(ContinualKind::Ewc),
            "emr" => Ok(ContinualKind::Emr),
            other => Err(Error::config(format!("unknown continual strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub dim: usize,
    pub negatives_k: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// `None` trains until early stopping triggers.
    pub max_epochs: Option<usize>,
    pub margin: f64,
    pub seed: u64,
    pub strategy: ContinualKind,
    pub ewc_lambda: f64,
    /// Old triples sampled for the Fisher diagonal.
    pub fisher_samples: usize,
    /// Replayed old triples per snapshot; `None` means 10% of the old train
    /// set.
    pub emr_memory: Option<usize>,
    /// Sequential batch evaluation. Results are bit-identical either way;
    /// this only turns off the thread pool.
    pub deterministic: bool,
    /// L2 coefficient on the parameters of each step.
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-4,
            batch_size: 2048,
            dim: 200,
            negatives_k: 10,
            patience: 3,
            max_epochs: None,
            margin: 1.0,
            seed: 11,
            strategy: ContinualKind::Ft,
            ewc_lambda: 1.0,
            fisher_samples: 1024,
            emr_memory: None,
            deterministic: false,
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.lr) {
            return Err(Error::config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be at least 1"));
        }
        if self.dim == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        if self.negatives_k == 0 {
            return Err(Error::config("negatives must be at least 1"));
        }
        if self.patience == 0 {
            return Err(Error::config("patience must be at least 1"));
        }
        if self.max_epochs == Some(0) {
            return Err(Error::config("max epochs must be at least 1"));
        }
        if !(self.ewc_lambda >= 0.0 && self.ewc_lambda.is_finite()) {
            return Err(Error::config("ewc lambda must be non-negative"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::config("l2 must be non-negative"));
        }
        if !self.margin.is_finite() {
            return Err(Error::config("margin must be finite"));
        }
        Ok(())
    }

    pub fn replay_size(&self, old_train: usize) -> usize {
        match self.emr_memory {
            Some(m) => m.min(old_train),
            None => ((old_train as f64) * 0.1).round() as usize,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_base_config_is_accepted() {
        let c = TrainConfig {
            dim: 200,
            batch_size: 2048,
            lr: 1e-4,
            ..Default::default()
        };
        c.validate().unwrap();
        assert_eq!(c.negatives_k, 10);
        assert_eq!(c.patience, 3);
    }

    #[test]
    fn zero_patience_and_batch_are_rejected() {
        assert!(TrainConfig { patience: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { max_epochs: Some(0), ..Default::default() }.validate().is_err());
    }
}
