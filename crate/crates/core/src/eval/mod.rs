//! Filtered link-prediction ranking, accuracy matrices, retention and
//! acquisition scores, and the signed-rank significance test.

mod metrics;
mod omega;
mod ranking;
mod wilcoxon;

pub use metrics::{evaluate_split, split_ranks, Metrics};
pub use omega::{omega_base, omega_new, AlphaMatrix, MetricKind};
pub use ranking::{candidate_scores, rank_from_scores, rank_query, FilterIndex, Slot};
pub use wilcoxon::{average_ranks, exact_p_value, wilcoxon_paired, WilcoxonResult, EXACT_MAX_N};
