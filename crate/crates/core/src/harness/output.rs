//! CSV files of a run directory.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::run::RunResult;
use crate::error::{Error, Result};
use crate::eval::Metrics;

pub const EPOCHS_CSV: &str = "epochs.csv";
pub const ALPHA_CSV: &str = "alpha.csv";
pub const OMEGA_CSV: &str = "omega.csv";
pub const FINAL_CSV: &str = "final_metrics.csv";
pub const INIT_CSV: &str = "init.csv";
pub const TIMING_CSV: &str = "timing.csv";
pub const MANIFEST_TOML: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub snapshot: usize,
    pub epoch: usize,
    pub loss: f64,
    pub valid_mrr: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub i: usize,
    pub j: usize,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaRow {
    pub metric: String,
    pub omega_base: Option<f64>,
    pub omega_new: Option<f64>,
    /// Micro average over all test sets after the final snapshot.
    pub aggregate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRow {
    /// `test` or `valid`.
    pub split: String,
    /// Snapshot index, or `all` for the micro average.
    pub snapshot: String,
    pub mrr: f64,
    pub hits_at_1: f64,
    pub hits_at_3: f64,
    pub hits_at_10: f64,
    pub queries: usize,
    pub skipped: usize,
}

impl FinalRow {
    fn new(split: &str, snapshot: String, m: &Metrics) -> Self {
        FinalRow {
            split: split.into(),
            snapshot,
            mrr: m.mrr,
            hits_at_1: m.hits_at_1,
            hits_at_3: m.hits_at_3,
            hits_at_10: m.hits_at_10,
            queries: m.queries,
            skipped: m.skipped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitRow {
    pub strategy: String,
    pub snapshot: usize,
    pub init_seconds: f64,
    pub fallback_count: usize,
    pub new_entities: usize,
    pub stats_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    /// Snapshot index, or `all` for the whole run.
    pub snapshot: String,
    pub epochs: usize,
    pub epochs_to_convergence: usize,
    pub epoch_seconds: f64,
    pub mean_epoch_seconds: f64,
    pub init_seconds: f64,
    pub total_seconds: f64,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::io(path, e.into()))
}

pub fn final_rows(result: &RunResult) -> Vec<FinalRow> {
    let mut rows: Vec<FinalRow> = result
        .final_metrics
        .iter()
        .enumerate()
        .map(|(i, m)| FinalRow::new("test", i.to_string(), m))
        .collect();
    rows.push(FinalRow::new("test", "all".into(), &result.omega.aggregate));
    rows.push(FinalRow::new("valid", "all".into(), &result.final_valid));
    rows
}

/// Write every CSV of a finished run into `dir`.
pub fn write_run(dir: &Path, result: &RunResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let epochs: Vec<EpochRow> = result
        .logs
        .iter()
        .flat_map(|log| {
            log.epochs.iter().map(move |e| EpochRow {
                snapshot: log.snapshot,
                epoch: e.epoch,
                loss: e.loss,
                valid_mrr: e.valid_mrr,
                seconds: e.seconds,
            })
        })
        .collect();
    write_csv(&dir.join(EPOCHS_CSV), &epochs)?;

    let alpha: Vec<AlphaRow> = result
        .alpha
        .iter()
        .flat_map(|a| {
            a.entries().map(move |(i, j, value)| AlphaRow {
                i,
                j,
                metric: a.metric.name().into(),
                value,
            })
        })
        .collect();
    write_csv(&dir.join(ALPHA_CSV), &alpha)?;

    let omega: Vec<OmegaRow> = result
        .omega
        .scores
        .iter()
        .map(|s| OmegaRow {
            metric: s.metric.name().into(),
            omega_base: s.omega_base,
            omega_new: s.omega_new,
            aggregate: s.metric.of(&result.omega.aggregate),
        })
        .collect();
    write_csv(&dir.join(OMEGA_CSV), &omega)?;
    write_csv(&dir.join(FINAL_CSV), &final_rows(result))?;

    let init: Vec<InitRow> = result
        .logs
        .iter()
        .filter_map(|l| l.init.as_ref())
        .map(|r| InitRow {
            strategy: r.strategy.to_string(),
            snapshot: r.snapshot,
            init_seconds: r.init_seconds,
            fallback_count: r.fallback_count,
            new_entities: r.new_entities,
            stats_seconds: r.stats_seconds,
        })
        .collect();
    write_csv(&dir.join(INIT_CSV), &init)?;

    let init_seconds = |l: &crate::continual::TrainLog| l.init.as_ref().map_or(0.0, |r| r.init_seconds + r.stats_seconds);
    let mut timing: Vec<TimingRow> = result
        .logs
        .iter()
        .map(|l| TimingRow {
            snapshot: l.snapshot.to_string(),
            epochs: l.epochs.len(),
            epochs_to_convergence: l.epochs_to_convergence,
            epoch_seconds: l.epoch_seconds(),
            mean_epoch_seconds: l.mean_epoch_seconds(),
            init_seconds: init_seconds(l),
            total_seconds: l.total_seconds,
        })
        .collect();
    let epochs_total: usize = result.logs.iter().map(|l| l.epochs.len()).sum();
    let epoch_seconds: f64 = result.logs.iter().map(|l| l.epoch_seconds()).sum();
    timing.push(TimingRow {
        snapshot: "all".into(),
        epochs: epochs_total,
        epochs_to_convergence: result.logs.iter().map(|l| l.epochs_to_convergence).sum(),
        epoch_seconds,
        mean_epoch_seconds: epoch_seconds / epochs_total.max(1) as f64,
        init_seconds: result.logs.iter().map(init_seconds).sum(),
        total_seconds: result.total_seconds,
    });
    write_csv(&dir.join(TIMING_CSV), &timing)
}
