use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{check_budgets, ExperimentConfig};
use super::output::{write_csv, write_run, MANIFEST_TOML};
use super::run::{run_sequence, RunResult};
use crate::error::{Error, Result};
use crate::eval::MetricKind;
use crate::kg_store::{load_dataset, validate_sequence, Dataset};
use crate::models::write_checkpoint;

pub const LEADERBOARD_CSV: &str = "leaderboard.csv";
pub const SWEEP_CSV: &str = "sweep.csv";

/// Load the configured dataset and refuse it when validation finds
/// violations.
pub fn prepare_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let path = config.dataset_path()?;
    let dataset = load_dataset(path)?;
    let report = validate_sequence(&dataset.sequence);
    if !report.is_ok() {
        let lines: Vec<String> = report.violations().map(|v| format!("  {v:?}")).collect();
        return Err(Error::Validation(format!(
            "{} has {} violation(s):\n{}",
            path.display(),
            report.num_violations(),
            lines.join("\n")
        )));
    }
    Ok(dataset)
}

/// Headline numbers of one finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub seed: u64,
    pub lr: f64,
    pub gamma: f64,
    pub omega_base: Option<f64>,
    pub omega_new: Option<f64>,
    pub omega_base_hits3: Option<f64>,
    pub omega_new_hits3: Option<f64>,
    pub test_mrr: f64,
    pub test_hits3: f64,
    pub valid_mrr: f64,
    /// Mean over increments of the epoch of the kept checkpoint.
    pub mean_convergence_epoch: f64,
    pub max_convergence_epoch: usize,
}

impl RunSummary {
    pub fn from_result(config: &ExperimentConfig, seed: u64, r: &RunResult) -> Self {
        let om = |m: MetricKind| r.omega.get(m).copied();
        let increments: Vec<usize> = r.epochs_to_convergence().into_iter().skip(1).collect();
        let mean_conv = if increments.is_empty() {
            r.logs[0].epochs_to_convergence as f64
        } else {
            increments.iter().sum::<usize>() as f64 / increments.len() as f64
        };
        RunSummary {
            run_id: config.run_id(seed),
            seed,
            lr: config.train.lr,
            gamma: config.init.gamma,
            omega_base: om(MetricKind::Mrr).and_then(|o| o.omega_base),
            omega_new: om(MetricKind::Mrr).and_then(|o| o.omega_new),
            omega_base_hits3: om(MetricKind::Hits3).and_then(|o| o.omega_base),
            omega_new_hits3: om(MetricKind::Hits3).and_then(|o| o.omega_new),
            test_mrr: r.omega.aggregate.mrr,
            test_hits3: r.omega.aggregate.hits_at_3,
            valid_mrr: r.final_valid.mrr,
            mean_convergence_epoch: mean_conv,
            max_convergence_epoch: r.epochs_to_convergence().into_iter().max().unwrap_or(0),
        }
    }
}

/// One seed of `config` on a loaded dataset, written to
/// `out_root/<run-id>/`. Returns the in-memory result as well.
pub fn run_experiment(
    config: &ExperimentConfig,
    dataset: &Dataset,
    seed: u64,
    out_root: &Path,
) -> Result<(RunSummary, RunResult)> {
    let spec = config.run_spec(seed)?;
    let dir = out_root.join(config.run_id(seed));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut manifest = config.clone();
    manifest.experiment.seeds = vec![seed];
    let manifest_path = dir.join(MANIFEST_TOML);
    fs::write(&manifest_path, manifest.to_toml_string()).map_err(|e| Error::io(&manifest_path, e))?;

    let kind = spec.model.kind;
    let result = run_sequence(dataset, &spec, |i, state| {
        write_checkpoint(&dir.join(format!("snapshot{i}.ckpt")), state, kind)
    })?;
    write_run(&dir, &result)?;
    Ok((RunSummary::from_result(config, seed, &result), result))
}

/// Run every seed of `config` into `config.experiment.out`.
pub fn run_seeds(config: &ExperimentConfig) -> Result<Vec<RunSummary>> {
    config.validate()?;
    let dataset = prepare_dataset(config)?;
    let cells: Vec<ExperimentConfig> = vec![config.clone(); config.experiment.seeds.len()];
    let seeds = config.experiment.seeds.clone();
    run_cells(config.workers(), &dataset, &config.experiment.out, cells.iter().zip(seeds))
}

fn run_cells<'a>(
    workers: usize,
    dataset: &Dataset,
    out_root: &Path,
    cells: impl Iterator<Item = (&'a ExperimentConfig, u64)>,
) -> Result<Vec<RunSummary>> {
    let cells: Vec<(&ExperimentConfig, u64)> = cells.collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|(c, seed)| {
                log::info!("run {}", c.run_id(*seed));
                run_experiment(c, dataset, *seed, out_root).map(|(s, _)| s)
            })
            .collect()
    })
}

/// One `(lr, gamma)` cell of a grid search, averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub strategy: String,
    pub init: String,
    pub lr: f64,
    pub gamma: f64,
    pub seeds: usize,
    pub mean_valid_mrr: f64,
    pub mean_test_mrr: f64,
    pub mean_omega_base: Option<f64>,
    pub mean_omega_new: Option<f64>,
    pub selected: bool,
}

#[derive(Debug, Clone)]
pub struct GridReport {
    /// Sorted best first.
    pub leaderboard: Vec<LeaderboardRow>,
    pub runs: Vec<RunSummary>,
}

impl GridReport {
    pub fn best(&self) -> &LeaderboardRow {
        &self.leaderboard[0]
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty()).map(|v| mean(v.into_iter()))
}

/// Order cells best first: higher mean validation MRR, then lower lr, then
/// lower gamma.
pub fn rank_cells(rows: &mut [LeaderboardRow]) {
    rows.sort_by(|a, b| {
        b.mean_valid_mrr
            .partial_cmp(&a.mean_valid_mrr)
            .unwrap_or(Ordering::Equal)
            .then(a.lr.total_cmp(&b.lr))
            .then(a.gamma.total_cmp(&b.gamma))
    });
    for (k, r) in rows.iter_mut().enumerate() {
        r.selected = k == 0;
    }
}

/// Aggregate per-run summaries into leaderboard cells.
pub fn leaderboard(config: &ExperimentConfig, runs: &[RunSummary]) -> Vec<LeaderboardRow> {
    let mut rows = Vec::new();
    for &lr in &config.experiment.lr_grid {
        for &gamma in &config.experiment.gamma_grid {
            let cell: Vec<&RunSummary> = runs.iter().filter(|r| r.lr == lr && r.gamma == gamma).collect();
            if cell.is_empty() {
                continue;
            }
            rows.push(LeaderboardRow {
                strategy: config.continual.strategy.clone(),
                init: config.init.kind.clone(),
                lr,
                gamma,
                seeds: cell.len(),
                mean_valid_mrr: mean(cell.iter().map(|r| r.valid_mrr)),
                mean_test_mrr: mean(cell.iter().map(|r| r.test_mrr)),
                mean_omega_base: mean_opt(cell.iter().map(|r| r.omega_base)),
                mean_omega_new: mean_opt(cell.iter().map(|r| r.omega_new)),
                selected: false,
            });
        }
    }
    rank_cells(&mut rows);
    rows
}

/// Run every `lr × gamma × seed` cell and write `leaderboard.csv`.
pub fn grid_search(config: &ExperimentConfig) -> Result<GridReport> {
    config.validate()?;
    let dataset = prepare_dataset(config)?;
    let e = &config.experiment;
    let mut cells = Vec::new();
    for &lr in &e.lr_grid {
        for &gamma in &e.gamma_grid {
            for &seed in &e.seeds {
                let mut c = config.clone();
                c.train.lr = lr;
                c.init.gamma = gamma;
                cells.push((c, seed));
            }
        }
    }
    let runs = run_cells(config.workers(), &dataset, &e.out, cells.iter().map(|(c, s)| (c, *s)))?;
    let board = leaderboard(config, &runs);
    write_csv(&e.out.join(LEADERBOARD_CSV), &board)?;
    Ok(GridReport { leaderboard: board, runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub budget: usize,
    pub seed: u64,
    pub omega_base: Option<f64>,
    pub omega_new: Option<f64>,
    pub omega_base_hits3: Option<f64>,
    pub omega_new_hits3: Option<f64>,
    pub mean_convergence_epoch: f64,
    pub max_convergence_epoch: usize,
}

/// Rerun the whole sequence once per epoch budget and seed, with early
/// stopping still active, and write `sweep.csv`.
pub fn epoch_sweep(config: &ExperimentConfig, budgets: &[usize]) -> Result<Vec<SweepRow>> {
    check_budgets(budgets)?;
    config.validate()?;
    let dataset = prepare_dataset(config)?;
    let out = &config.experiment.out;
    let mut rows = Vec::new();
    for &budget in budgets {
        let mut c = config.clone();
        c.train.max_epochs = budget;
        let root: PathBuf = out.join(format!("budget{budget}"));
        let runs = run_cells(config.workers(), &dataset, &root, c.experiment.seeds.iter().map(|&s| (&c, s)))?;
        rows.extend(runs.into_iter().map(|r| SweepRow {
            budget,
            seed: r.seed,
            omega_base: r.omega_base,
            omega_new: r.omega_new,
            omega_base_hits3: r.omega_base_hits3,
            omega_new_hits3: r.omega_new_hits3,
            mean_convergence_epoch: r.mean_convergence_epoch,
            max_convergence_epoch: r.max_convergence_epoch,
        }));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_csv(&out.join(SWEEP_CSV), &rows)?;
    Ok(rows)
}
