//! Base training and continual updates: fine-tuning, EWC and replay.

mod config;
mod emr;
mod ewc;
mod trainer;

pub use config::{ContinualKind, TrainConfig};
pub use emr::emr_replay;
pub use ewc::{estimate_fisher, ewc_penalty, fisher_from_pairs, EwcPenalty};
pub use trainer::{fit, train_base, train_increment, validation_mrr, EpochRecord, FitData, Increment, TrainLog};
