//! Experiment orchestration: configs, single runs, seed batches, grid
//! search, epoch-budget sweeps and reports over run directories.

mod config;
mod experiment;
pub mod output;
mod report;
mod run;

pub use config::{
    check_budgets, ContinualSection, DatasetSection, ExperimentConfig, ExperimentSection, InitSection, ModelSection,
    TrainSection, DEFAULT_EPOCH_BUDGETS, DEFAULT_SEEDS,
};
pub use experiment::{
    epoch_sweep, grid_search, leaderboard, prepare_dataset, rank_cells, run_experiment, run_seeds, GridReport,
    LeaderboardRow, RunSummary, SweepRow, LEADERBOARD_CSV, SWEEP_CSV,
};
pub use report::{compare_final_mrr, find_runs, summarize, ReportRow, StoredRun, SUMMARY_CSV};
pub use run::{run_sequence, OmegaReport, OmegaScores, RunResult, RunSpec};
