use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::RunSpec;
use crate::continual::{ContinualKind, TrainConfig};
use crate::error::{Error, Result};
use crate::init::{Fallback, InitKind, InitStrategy};
use crate::models::{Model, ModelKind, Norm};

pub const DEFAULT_SEEDS: [u64; 5] = [11, 22, 33, 44, 55];
pub const DEFAULT_EPOCH_BUDGETS: [usize; 6] = [10, 25, 50, 100, 150, 200];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// `transe`, `transh`, `distmult` or `rotate`.
    pub kind: String,
    /// Norm order (1 or 2) for TransE and TransH.
    pub norm: u32,
    pub dim: usize,
    pub margin: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: "transe".into(),
            norm: 1,
            dim: 200,
            margin: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub lr: f64,
    pub batch: usize,
    pub negatives: usize,
    pub patience: usize,
    /// 0 means unbounded.
    pub max_epochs: usize,
    pub l2: f64,
    pub deterministic: bool,
    /// Filtered ranking; raw ranking when false.
    pub filtered: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            lr: t.lr,
            batch: t.batch_size,
            negatives: t.negatives_k,
            patience: t.patience,
            max_epochs: 0,
            l2: t.l2,
            deterministic: false,
            filtered: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    /// `random`, `model`, `model-head` or `schema`.
    pub kind: String,
    pub gamma: f64,
    /// `random` or `centroid`; empty picks the strategy's default.
    pub fallback: String,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection {
            kind: "random".into(),
            gamma: 0.0,
            fallback: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinualSection {
    /// `ft`, `ewc` or `emr`.
    pub strategy: String,
    pub ewc_lambda: f64,
    pub fisher_samples: usize,
    /// Replay size; negative means 10% of the old train set.
    pub emr_memory: i64,
}

impl Default for ContinualSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        ContinualSection {
            strategy: "ft".into(),
            ewc_lambda: t.ewc_lambda,
            fisher_samples: t.fisher_samples,
            emr_memory: -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seeds: Vec<u64>,
    pub lr_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub epoch_budgets: Vec<usize>,
    /// Parallel runs; 0 defers to `KGEC_WORKERS`, then to 1.
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            seeds: DEFAULT_SEEDS.to_vec(),
            lr_grid: vec![5e-4, 1e-4, 5e-5],
            gamma_grid: vec![0.0, 0.1, 0.5],
            epoch_budgets: DEFAULT_EPOCH_BUDGETS.to_vec(),
            workers: 0,
            out: PathBuf::from("runs"),
        }
    }
}

/// A complete experiment description, stored as sectioned `key = value`
/// text (TOML).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub init: InitSection,
    pub continual: ContinualSection,
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn dataset_path(&self) -> Result<&Path> {
        self.dataset
            .path
            .as_deref()
            .ok_or_else(|| Error::config("no dataset path given"))
    }

    /// Worker count: explicit setting, then `KGEC_WORKERS`, then 1.
    pub fn workers(&self) -> usize {
        if self.experiment.workers > 0 {
            return self.experiment.workers;
        }
        std::env::var("KGEC_WORKERS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n: &usize| n > 0)
            .unwrap_or(1)
    }

    pub fn model(&self) -> Result<Model> {
        let model = Model::new(self.model.kind.parse::<ModelKind>()?, Norm::from_order(self.model.norm)?);
        model.check_dim(self.model.dim)?;
        Ok(model)
    }

    pub fn init_strategy(&self) -> Result<InitStrategy> {
        let s = InitStrategy::new(self.init.kind.parse::<InitKind>()?, self.init.gamma)?;
        Ok(if self.init.fallback.is_empty() {
            s
        } else {
            s.with_fallback(self.init.fallback.parse::<Fallback>()?)
        })
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let t = &self.train;
        let c = &self.continual;
        let config = TrainConfig {
            lr: t.lr,
            batch_size: t.batch,
            dim: self.model.dim,
            negatives_k: t.negatives,
            patience: t.patience,
            max_epochs: (t.max_epochs > 0).then_some(t.max_epochs),
            margin: self.model.margin,
            seed,
            strategy: c.strategy.parse::<ContinualKind>()?,
            ewc_lambda: c.ewc_lambda,
            fisher_samples: c.fisher_samples,
            emr_memory: usize::try_from(c.emr_memory).ok(),
            deterministic: t.deterministic,
            l2: t.l2,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn run_spec(&self, seed: u64) -> Result<RunSpec> {
        Ok(RunSpec {
            model: self.model()?,
            train: self.train_config(seed)?,
            init: self.init_strategy()?,
            filtered: self.train.filtered,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.run_spec(self.experiment.seeds.first().copied().unwrap_or(0))?;
        let e = &self.experiment;
        for (name, empty) in [
            ("seeds", e.seeds.is_empty()),
            ("lr_grid", e.lr_grid.is_empty()),
            ("gamma_grid", e.gamma_grid.is_empty()),
            ("epoch_budgets", e.epoch_budgets.is_empty()),
        ] {
            if empty {
                return Err(Error::config(format!("{name} must not be empty")));
            }
        }
        if e.seeds.iter().collect::<HashSet<_>>().len() != e.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        if let Some(lr) = e.lr_grid.iter().find(|&&lr| lr.is_nan() || lr <= 0.0) {
            return Err(Error::config(format!("learning rate {lr} must be positive")));
        }
        if let Some(g) = e.gamma_grid.iter().find(|&&g| g.is_nan() || g < 0.0) {
            return Err(Error::config(format!("gamma {g} must be non-negative")));
        }
        check_budgets(&e.epoch_budgets)
    }

    /// Identifier of one run directory.
    pub fn run_id(&self, seed: u64) -> String {
        format!(
            "{}-{}-{}-lr{}-g{}-s{}",
            self.continual.strategy, self.init.kind, self.model.kind, self.train.lr, self.init.gamma, seed
        )
    }
}

/// Budgets must be positive and strictly increasing.
pub fn check_budgets(budgets: &[usize]) -> Result<()> {
    if budgets.is_empty() {
        return Err(Error::config("epoch budgets must not be empty"));
    }
    if budgets.contains(&0) {
        return Err(Error::config("epoch budgets must be at least 1"));
    }
    if budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("epoch budgets must be sorted ascending without repeats"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let mut c = ExperimentConfig::default();
        c.dataset.path = Some("data".into());
        c.validate().unwrap();
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.experiment.seeds, vec![11, 22, 33, 44, 55]);
    }

    #[test]
    fn best_published_cell_parses() {
        let text = "[dataset]\npath = \"fbinc-s\"\n\n[model]\nkind = \"transe\"\ndim = 200\n\n[train]\nlr = 5e-4\nbatch = 2048\npatience = 3\n\n[init]\nkind = \"schema\"\ngamma = 0.0\n\n[continual]\nstrategy = \"ft\"\n";
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        c.validate().unwrap();
        let spec = c.run_spec(11).unwrap();
        assert_eq!(spec.train.lr, 5e-4);
        assert_eq!(spec.init.kind, InitKind::Schema);
    }

    #[test]
    fn rejects_duplicate_seeds_and_unknown_keys() {
        let mut c = ExperimentConfig::default();
        c.experiment.seeds = vec![1, 1];
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml_str("[train]\nbogus = 1\n").is_err());
    }

    #[test]
    fn budgets_must_be_positive_and_sorted() {
        assert!(check_budgets(&[0, 10]).is_err());
        assert!(check_budgets(&[25, 10]).is_err());
        check_budgets(&[10, 200]).unwrap();
    }
}
