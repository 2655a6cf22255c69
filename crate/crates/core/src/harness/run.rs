use std::time::Instant;

use crate::continual::{train_base, train_increment, Increment, TrainConfig, TrainLog};
use crate::error::Result;
use crate::eval::{evaluate_split, omega_base, omega_new, AlphaMatrix, FilterIndex, Metrics, MetricKind};
use crate::init::InitStrategy;
use crate::kg_store::{Dataset, SnapshotSequence};
use crate::models::{EmbeddingState, Model};

/// Everything one run needs besides the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: Model,
    pub train: TrainConfig,
    pub init: InitStrategy,
    /// Filtered ranking (default); raw ranking when false.
    pub filtered: bool,
}

/// Retention and acquisition scores for one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaScores {
    pub metric: MetricKind,
    pub omega_base: Option<f64>,
    pub omega_new: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaReport {
    pub scores: Vec<OmegaScores>,
    /// Micro average over all test sets after the final snapshot.
    pub aggregate: Metrics,
}

impl OmegaReport {
    pub fn get(&self, metric: MetricKind) -> Option<&OmegaScores> {
        self.scores.iter().find(|s| s.metric == metric)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// One matrix per [`MetricKind::ALL`] entry.
    pub alpha: Vec<AlphaMatrix>,
    pub omega: OmegaReport,
    /// Per test set after the final snapshot.
    pub final_metrics: Vec<Metrics>,
    /// Micro-averaged validation metrics over every snapshot after the final
    /// snapshot.
    pub final_valid: Metrics,
    pub logs: Vec<TrainLog>,
    pub total_seconds: f64,
}

impl RunResult {
    pub fn alpha(&self, metric: MetricKind) -> &AlphaMatrix {
        self.alpha.iter().find(|a| a.metric == metric).expect("all metrics are tracked")
    }

    pub fn epochs_to_convergence(&self) -> Vec<usize> {
        self.logs.iter().map(|l| l.epochs_to_convergence).collect()
    }
}

fn evaluate_sets(
    model: &Model,
    state: &EmbeddingState,
    seq: &SnapshotSequence,
    through: usize,
    filtered: bool,
    parallel: bool,
    valid: bool,
) -> Vec<Metrics> {
    let filter = filtered.then(|| FilterIndex::new(&seq.known_triples(through)));
    (0..=through)
        .map(|i| {
            let snap = seq.snapshot(i);
            let set = if valid { &snap.valid } else { &snap.test };
            evaluate_split(model, state, set, filter.as_ref(), parallel)
        })
        .collect()
}

/// Train the base snapshot and every increment, filling the α matrices
/// after each snapshot. `on_snapshot` sees the state after each snapshot
/// (checkpoint hook).
pub fn run_sequence(
    dataset: &Dataset,
    spec: &RunSpec,
    mut on_snapshot: impl FnMut(usize, &EmbeddingState) -> Result<()>,
) -> Result<RunResult> {
    let start = Instant::now();
    let seq = &dataset.sequence;
    let n = seq.num_increments();
    let parallel = !spec.train.deterministic;
    let mut alpha: Vec<AlphaMatrix> = MetricKind::ALL.iter().map(|&m| AlphaMatrix::new(m, n)).collect();
    let mut logs = Vec::with_capacity(n + 1);

    let (mut state, log) = train_base(&spec.model, seq, &spec.train)?;
    logs.push(log);
    let mut last = Vec::new();
    for j in 0..=n {
        if j > 0 {
            let inc = Increment {
                seq,
                schema: &dataset.schema,
                index: j,
            };
            let (next, log) = train_increment(&spec.model, state, inc, &spec.init, &spec.train)?;
            state = next;
            logs.push(log);
        }
        on_snapshot(j, &state)?;
        last = evaluate_sets(&spec.model, &state, seq, j, spec.filtered, parallel, false);
        for (i, m) in last.iter().enumerate() {
            for a in alpha.iter_mut() {
                a.set(i, j, a.metric.of(m))?;
            }
        }
    }

    let scores = alpha
        .iter()
        .map(|a| OmegaScores {
            metric: a.metric,
            omega_base: if n > 0 { omega_base(a).ok() } else { None },
            omega_new: if n > 0 { omega_new(a).ok() } else { None },
        })
        .collect();
    let final_valid = Metrics::merge(&evaluate_sets(&spec.model, &state, seq, n, spec.filtered, parallel, true));
    Ok(RunResult {
        omega: OmegaReport {
            scores,
            aggregate: Metrics::merge(&last),
        },
        alpha,
        final_metrics: last,
        final_valid,
        logs,
        total_seconds: start.elapsed().as_secs_f64(),
    })
}
