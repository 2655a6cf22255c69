//! `kgec`: build datasets, train continual embeddings, and report results.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kgec_core::builder::{build_snapshots, load_corpus, synth_clustered_kg, BaseSize, BuildSpec, Growth};
use kgec_core::eval::{evaluate_split, FilterIndex, Metrics};
use kgec_core::harness::{
    compare_final_mrr, epoch_sweep, find_runs, grid_search, run_seeds, summarize, ExperimentConfig,
};
use kgec_core::kg_store::{load_dataset, validate_sequence};
use kgec_core::models::read_checkpoint;
use kgec_core::{Model, Norm};

#[derive(Parser)]
#[command(name = "kgec", version, about = "Continual knowledge graph embedding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an incremental dataset from a flat corpus.
    Build(BuildArgs),
    /// Check a dataset directory for inclusion and leakage violations.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Train one run per seed.
    Train(RunArgs),
    /// Grid search over learning rate and gamma.
    Grid {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated learning rates.
        #[arg(long, value_delimiter = ',')]
        lrs: Option<Vec<f64>>,
        /// Comma-separated gamma values.
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// Rerun the sequence under increasing epoch budgets.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated, ascending.
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<usize>>,
    },
    /// Evaluate a checkpoint on the test sets of snapshots `0..=snapshot`.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        snapshot: usize,
        /// Norm order for TransE and TransH checkpoints.
        #[arg(long, default_value_t = 1)]
        norm: u32,
        /// Unfiltered ranking.
        #[arg(long)]
        raw: bool,
    },
    /// Summarize run directories, optionally against a baseline group.
    Report {
        #[arg(long)]
        runs: PathBuf,
        /// Second group of runs for a paired signed-rank test on final MRR.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BuildArgs {
    /// Flat `head<TAB>relation<TAB>tail` corpus.
    #[arg(long, required_unless_present = "synthetic")]
    corpus: Option<PathBuf>,
    /// `entity<TAB>class` lines.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Generate a class-clustered corpus: `classes,per_class,intra,inter`.
    #[arg(long, value_delimiter = ',', conflicts_with = "corpus")]
    synthetic: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, conflicts_with = "base_fraction")]
    base_count: Option<usize>,
    #[arg(long)]
    base_fraction: Option<f64>,
    #[arg(long, default_value_t = 4)]
    snapshots: usize,
    /// Train triples added per snapshot, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "growth_percent")]
    growth: Option<Vec<usize>>,
    /// Train triples added per snapshot as a percentage of the base.
    #[arg(long)]
    growth_percent: Option<f64>,
    /// `train,valid,test` ratios.
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<f64>>,
    #[arg(long, default_value_t = 11)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    /// Sectioned `key = value` experiment file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// transe | transh | distmult | rotate
    #[arg(long)]
    model: Option<String>,
    /// Norm order for TransE and TransH.
    #[arg(long)]
    norm: Option<u32>,
    /// random | model | model-head | schema
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    /// ft | ewc | emr
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// 0 means unbounded.
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    ewc_lambda: Option<f64>,
    #[arg(long)]
    emr_memory: Option<usize>,
    /// Single seed; overrides `--seeds`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, env = "KGEC_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    deterministic: bool,
    /// Unfiltered ranking.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        if let Some(p) = &self.dataset {
            c.dataset.path = Some(p.clone());
        }
        set!(self.model, c.model.kind);
        set!(self.norm, c.model.norm);
        set!(self.dim, c.model.dim);
        set!(self.margin, c.model.margin);
        set!(self.init, c.init.kind);
        set!(self.gamma, c.init.gamma);
        set!(self.strategy, c.continual.strategy);
        set!(self.ewc_lambda, c.continual.ewc_lambda);
        set!(self.lr, c.train.lr);
        set!(self.batch, c.train.batch);
        set!(self.negatives, c.train.negatives);
        set!(self.patience, c.train.patience);
        set!(self.max_epochs, c.train.max_epochs);
        set!(self.seeds, c.experiment.seeds);
        set!(self.workers, c.experiment.workers);
        set!(self.out, c.experiment.out);
        if let Some(m) = self.emr_memory {
            c.continual.emr_memory = m as i64;
        }
        if let Some(s) = self.seed {
            c.experiment.seeds = vec![s];
        }
        if let Some(lr) = self.lr {
            c.experiment.lr_grid = vec![lr];
        }
        if let Some(g) = self.gamma {
            c.experiment.gamma_grid = vec![g];
        }
        c.train.deterministic |= self.deterministic;
        c.train.filtered &= !self.raw;
        c.validate()?;
        Ok(c)
    }
}

fn build(args: &BuildArgs) -> Result<()> {
    let corpus = match (&args.corpus, &args.synthetic) {
        (_, Some(s)) if s.len() == 4 => synth_clustered_kg(s[0] as usize, s[1] as usize, s[2], s[3], args.seed)?,
        (_, Some(_)) => bail!("--synthetic takes classes,per_class,intra,inter"),
        (Some(path), None) => load_corpus(path, args.schema.as_deref())?,
        (None, None) => bail!("either --corpus or --synthetic is required"),
    };
    let base = match (args.base_count, args.base_fraction) {
        (Some(n), _) => BaseSize::Count(n),
        (None, Some(f)) => BaseSize::Fraction(f),
        (None, None) => BaseSize::Fraction(0.5),
    };
    let growth = match (&args.growth, args.growth_percent) {
        (Some(g), _) => Growth::Counts(g.clone()),
        (None, Some(p)) => Growth::Percent(p),
        (None, None) => bail!("either --growth or --growth-percent is required"),
    };
    let mut spec = BuildSpec::new(base, args.snapshots, growth, args.seed);
    if let Some(s) = &args.split {
        if s.len() != 3 {
            bail!("--split takes train,valid,test");
        }
        spec.split = (s[0], s[1], s[2]);
    }
    let (dataset, manifest) = build_snapshots(&corpus, &spec, &args.out)?;
    println!("snapshot\ttrain\tvalid\ttest\tnew_entities\tnew_relations");
    for c in &manifest.snapshots {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            c.snapshot, c.train, c.valid, c.test, c.new_entities, c.new_relations
        );
    }
    let report = validate_sequence(&dataset.sequence);
    println!("violations: {}", report.num_violations());
    Ok(())
}

fn validate(dataset: &Path) -> Result<bool> {
    let ds = load_dataset(dataset)?;
    let report = validate_sequence(&ds.sequence);
    for issue in &report.issues {
        let tag = if issue.is_violation() { "violation" } else { "note" };
        println!("{tag}: {issue:?}");
    }
    println!(
        "{} snapshots, {} entities, {} relations, {} violations",
        ds.sequence.len(),
        ds.sequence.vocab.num_entities(),
        ds.sequence.vocab.num_relations(),
        report.num_violations()
    );
    Ok(report.is_ok())
}

fn print_metrics(label: &str, m: &Metrics) {
    println!(
        "{label}\tmrr={:.4}\thits@1={:.4}\thits@3={:.4}\thits@10={:.4}\tqueries={}\tskipped={}",
        m.mrr, m.hits_at_1, m.hits_at_3, m.hits_at_10, m.queries, m.skipped
    );
}

fn eval(dataset: &Path, checkpoint: &Path, snapshot: usize, norm: u32, raw: bool) -> Result<()> {
    let ds = load_dataset(dataset)?;
    if snapshot >= ds.sequence.len() {
        bail!("snapshot {snapshot} does not exist ({} snapshots)", ds.sequence.len());
    }
    let (state, kind) = read_checkpoint(checkpoint)?;
    let model = Model::new(kind, Norm::from_order(norm)?);
    let filter = (!raw).then(|| FilterIndex::new(&ds.sequence.known_triples(snapshot)));
    let mut parts = Vec::new();
    for i in 0..=snapshot {
        let m = evaluate_split(&model, &state, &ds.sequence.snapshot(i).test, filter.as_ref(), true);
        print_metrics(&format!("test{i}"), &m);
        parts.push(m);
    }
    print_metrics("all", &Metrics::merge(&parts));
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn report(runs: &Path, baseline: Option<&Path>) -> Result<()> {
    let rows = summarize(runs)?;
    println!("run\tseed\tomega_base\tomega_new\ttest_mrr\ttest_hits3\tvalid_mrr");
    for r in &rows {
        println!(
            "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
            r.run,
            r.seed,
            fmt_opt(r.omega_base),
            fmt_opt(r.omega_new),
            r.test_mrr,
            r.test_hits3,
            r.valid_mrr
        );
    }
    if let Some(base) = baseline {
        let w = compare_final_mrr(&find_runs(runs)?, &find_runs(base)?)?;
        println!(
            "signed-rank vs {}: n={} W+={} p={:.4e} ({})",
            base.display(),
            w.n,
            w.w_plus,
            w.p_value,
            if w.exact { "exact" } else { "normal approximation" }
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Build(args) => build(&args)?,
        Command::Validate { dataset } => return validate(&dataset),
        Command::Train(args) => {
            let config = args.config()?;
            for s in run_seeds(&config).context("training failed")? {
                println!(
                    "{}\tomega_base={}\tomega_new={}\ttest_mrr={:.4}",
                    s.run_id,
                    fmt_opt(s.omega_base),
                    fmt_opt(s.omega_new),
                    s.test_mrr
                );
            }
        }
        Command::Grid { run, lrs, gammas } => {
            let mut config = run.config()?;
            if let Some(l) = lrs {
                config.experiment.lr_grid = l;
            }
            if let Some(g) = gammas {
                config.experiment.gamma_grid = g;
            }
            let report = grid_search(&config).context("grid search failed")?;
            let best = report.best();
            println!(
                "{} runs; best lr={} gamma={} mean valid mrr={:.4}",
                report.runs.len(),
                best.lr,
                best.gamma,
                best.mean_valid_mrr
            );
        }
        Command::Sweep { run, budgets } => {
            let config = run.config()?;
            let budgets = budgets.unwrap_or_else(|| config.experiment.epoch_budgets.clone());
            for r in epoch_sweep(&config, &budgets).context("sweep failed")? {
                println!(
                    "budget={}\tseed={}\tomega_base={}\tomega_new={}\tmean_convergence={:.2}",
                    r.budget,
                    r.seed,
                    fmt_opt(r.omega_base),
                    fmt_opt(r.omega_new),
                    r.mean_convergence_epoch
                );
            }
        }
        Command::Eval {
            dataset,
            checkpoint,
            snapshot,
            norm,
            raw,
        } => eval(&dataset, &checkpoint, snapshot, norm, raw)?,
        Command::Report { runs, baseline } => report(&runs, baseline.as_deref())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
