mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use kgec_core::builder::{build_snapshots, synth_clustered_kg, BaseSize, BuildSpec, Growth, MANIFEST_FILE};
use kgec_core::eval::MetricKind;
use kgec_core::harness::output::{read_csv, AlphaRow, FinalRow, TimingRow, ALPHA_CSV, FINAL_CSV, MANIFEST_TOML, OMEGA_CSV, TIMING_CSV};
use kgec_core::harness::{epoch_sweep, grid_search, prepare_dataset, run_experiment, run_seeds, ExperimentConfig, LEADERBOARD_CSV};
use kgec_core::kg_store::{load_dataset, validate_sequence};

fn build(dir: &Path, increments: usize) {
    let corpus = synth_clustered_kg(3, 20, 0.3, 0.05, 3).unwrap();
    let spec = BuildSpec::new(BaseSize::Fraction(0.6), increments, Growth::Counts(vec![15; increments]), 3);
    build_snapshots(&corpus, &spec, dir).unwrap();
}

fn tiny_config(data: &Path, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.dataset.path = Some(data.to_path_buf());
    c.model.dim = 8;
    c.model.norm = 2;
    c.train.lr = 1e-2;
    c.train.batch = 32;
    c.train.negatives = 2;
    c.train.max_epochs = 6;
    c.train.deterministic = true;
    c.init.kind = "schema".into();
    c.experiment.out = out.to_path_buf();
    c.experiment.workers = 2;
    c.continual.fisher_samples = 16;
    c
}

fn snapshot_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.clone(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn built_dataset_round_trips_through_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth_clustered_kg(3, 20, 0.3, 0.05, 3).unwrap();
    let spec = BuildSpec::new(BaseSize::Fraction(0.6), 3, Growth::Counts(vec![15; 3]), 3);
    let (built, manifest) = build_snapshots(&corpus, &spec, tmp.path()).unwrap();
    assert!(tmp.path().join(MANIFEST_FILE).is_file());
    assert_eq!(manifest.snapshots.len(), 4);
    let loaded = load_dataset(tmp.path()).unwrap();
    assert_eq!(loaded.sequence.len(), built.sequence.len());
    for i in 0..built.sequence.len() {
        let (a, b) = (built.sequence.snapshot(i), loaded.sequence.snapshot(i));
        assert_eq!(a, b, "snapshot {i}");
    }
    assert_eq!(loaded.schema, built.schema);
    assert!(validate_sequence(&loaded.sequence).is_ok());
}

#[test]
fn runs_reproduce_from_their_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    build(&data, 4);
    let config = tiny_config(&data, &tmp.path().join("a"));
    let ds = prepare_dataset(&config).unwrap();
    let before = snapshot_files(&data);

    let (summary, result) = run_experiment(&config, &ds, 22, &config.experiment.out).unwrap();
    let run_a = config.experiment.out.join(&summary.run_id);

    // N = 4 increments: 5 * 6 / 2 entries per metric
    let alpha: Vec<AlphaRow> = read_csv(&run_a.join(ALPHA_CSV)).unwrap();
    assert_eq!(alpha.iter().filter(|r| r.metric == MetricKind::Mrr.name()).count(), 15);
    let m = result.alpha(MetricKind::Mrr);
    assert_eq!((0..5).flat_map(|j| (0..=j).map(move |i| (i, j))).filter(|&(i, j)| m.get(i, j).is_some()).count(), 15);
    for i in 0..5 {
        assert!(run_a.join(format!("snapshot{i}.ckpt")).is_file());
    }
    let timing: Vec<TimingRow> = read_csv(&run_a.join(TIMING_CSV)).unwrap();
    assert_eq!(timing.len(), 6);
    assert!(timing.iter().all(|t| t.epochs >= t.epochs_to_convergence && t.total_seconds >= t.epoch_seconds));

    let mut replay = ExperimentConfig::load(&run_a.join(MANIFEST_TOML)).unwrap();
    replay.experiment.out = tmp.path().join("b");
    let seed = replay.experiment.seeds[0];
    run_experiment(&replay, &ds, seed, &replay.experiment.out).unwrap();
    let run_b = replay.experiment.out.join(replay.run_id(seed));
    for file in [ALPHA_CSV, OMEGA_CSV, FINAL_CSV, "snapshot4.ckpt"] {
        assert_eq!(fs::read(run_a.join(file)).unwrap(), fs::read(run_b.join(file)).unwrap(), "{file}");
    }
    assert_eq!(snapshot_files(&data), before);
}

#[test]
fn grid_leaderboard_matches_run_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    build(&data, 1);
    let mut config = tiny_config(&data, &tmp.path().join("grid"));
    config.train.max_epochs = 3;
    config.experiment.lr_grid = vec![1e-2, 5e-3, 1e-3];
    config.experiment.gamma_grid = vec![0.0, 0.1, 0.5];
    config.experiment.workers = 4;
    let before = snapshot_files(&data);

    let report = grid_search(&config).unwrap();
    assert_eq!(report.runs.len(), 45);
    assert_eq!(report.leaderboard.len(), 9);
    assert!(config.experiment.out.join(LEADERBOARD_CSV).is_file());
    let best = report.best();
    assert!(best.selected);
    assert!(report.leaderboard.iter().all(|r| r.mean_valid_mrr <= best.mean_valid_mrr));

    for cell in &report.leaderboard {
        let mut c = config.clone();
        c.train.lr = cell.lr;
        c.init.gamma = cell.gamma;
        let by_hand: Vec<f64> = c
            .experiment
            .seeds
            .iter()
            .map(|&s| {
                let rows: Vec<FinalRow> = read_csv(&c.experiment.out.join(c.run_id(s)).join(FINAL_CSV)).unwrap();
                rows.iter().find(|r| r.split == "valid" && r.snapshot == "all").unwrap().mrr
            })
            .collect();
        let mean = by_hand.iter().sum::<f64>() / by_hand.len() as f64;
        assert!((mean - cell.mean_valid_mrr).abs() < 1e-12);
    }
    assert_eq!(snapshot_files(&data), before);
}

#[test]
fn sweep_respects_budgets() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    build(&data, 2);
    let mut config = tiny_config(&data, &tmp.path().join("sweep"));
    config.experiment.seeds = vec![1, 2];
    let rows = epoch_sweep(&config, &[2, 4]).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r.max_convergence_epoch <= r.budget);
        assert!(r.mean_convergence_epoch <= r.budget as f64);
    }
    assert!(config.experiment.out.join("budget2").is_dir());
}

#[test]
fn missing_dataset_aborts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tiny_config(&tmp.path().join("nowhere"), &tmp.path().join("out"));
    assert!(run_seeds(&config).is_err());
    assert!(!config.experiment.out.exists());
}
