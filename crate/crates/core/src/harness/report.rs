use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{read_csv, write_csv, FinalRow, OmegaRow, FINAL_CSV, MANIFEST_TOML, OMEGA_CSV};
use crate::error::{Error, Result};
use crate::eval::{wilcoxon_paired, WilcoxonResult};

pub const SUMMARY_CSV: &str = "summary.csv";

/// One run directory, as read back from its CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub run: String,
    pub seed: u64,
    pub omega_base: Option<f64>,
    pub omega_new: Option<f64>,
    pub test_mrr: f64,
    pub test_hits3: f64,
    pub valid_mrr: f64,
}

/// A run directory loaded from disk.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub omega: Vec<OmegaRow>,
    pub finals: Vec<FinalRow>,
}

impl StoredRun {
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(StoredRun {
            dir: dir.to_owned(),
            config: ExperimentConfig::load(&dir.join(MANIFEST_TOML))?,
            omega: read_csv(&dir.join(OMEGA_CSV))?,
            finals: read_csv(&dir.join(FINAL_CSV))?,
        })
    }

    pub fn seed(&self) -> u64 {
        self.config.experiment.seeds.first().copied().unwrap_or_default()
    }

    fn final_row(&self, split: &str, snapshot: &str) -> Option<&FinalRow> {
        self.finals.iter().find(|r| r.split == split && r.snapshot == snapshot)
    }

    /// Final test MRR per snapshot test set, in snapshot order.
    pub fn test_mrrs(&self) -> Vec<f64> {
        self.finals
            .iter()
            .filter(|r| r.split == "test" && r.snapshot != "all")
            .map(|r| r.mrr)
            .collect()
    }

    pub fn row(&self) -> ReportRow {
        let mrr = self.omega.iter().find(|o| o.metric == "mrr");
        let test = self.final_row("test", "all");
        ReportRow {
            run: self.dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            seed: self.seed(),
            omega_base: mrr.and_then(|o| o.omega_base),
            omega_new: mrr.and_then(|o| o.omega_new),
            test_mrr: test.map_or(f64::NAN, |r| r.mrr),
            test_hits3: test.map_or(f64::NAN, |r| r.hits_at_3),
            valid_mrr: self.final_row("valid", "all").map_or(f64::NAN, |r| r.mrr),
        }
    }
}

/// Every run directory directly below `root` (those holding a manifest),
/// sorted by name.
pub fn find_runs(root: &Path) -> Result<Vec<StoredRun>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(MANIFEST_TOML).is_file())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| StoredRun::load(d)).collect()
}

/// Summarize the runs below `root` into `root/summary.csv`.
pub fn summarize(root: &Path) -> Result<Vec<ReportRow>> {
    let rows: Vec<ReportRow> = find_runs(root)?.iter().map(StoredRun::row).collect();
    write_csv(&root.join(SUMMARY_CSV), &rows)?;
    Ok(rows)
}

/// Paired signed-rank test of final per-test-set MRR between two groups of
/// runs, pairing runs by seed and test sets by snapshot.
pub fn compare_final_mrr(a: &[StoredRun], b: &[StoredRun]) -> Result<WilcoxonResult> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ra in a {
        let Some(rb) = b.iter().find(|r| r.seed() == ra.seed()) else {
            continue;
        };
        let (ma, mb) = (ra.test_mrrs(), rb.test_mrrs());
        if ma.len() != mb.len() {
            return Err(Error::Validation(format!(
                "runs {} and {} cover different snapshot counts",
                ra.dir.display(),
                rb.dir.display()
            )));
        }
        xs.extend(ma);
        ys.extend(mb);
    }
    wilcoxon_paired(&xs, &ys)
}
