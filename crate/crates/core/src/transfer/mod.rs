//! One-to-many policy transfer along evolution trees.

mod config;
mod engine;
mod gradient;
mod phase;
mod report;
mod step;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::trainers::TrainerError;

pub use config::{Preset, TransferConfig};
pub use engine::{geom_median_baseline, herd_baseline, meta_evolve, run_method, TransferRun};
pub use gradient::estimate_reward_gradient;
pub use phase::{finish_train, phase_train, window_at, PhaseOutcome, PhaseRecord};
pub use report::{Branch, Method, Outcome, TargetPath, TransferReport, SCHEMA_VERSION};
pub use step::evolution_step;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{context}: {source}")]
    Trainer {
        context: String,
        #[source]
        source: TrainerError,
    },
    #[error("evolution direction vanished")]
    DegenerateDirection,
    #[error("expert success rate {success} is below the threshold {threshold} at the source")]
    ExpertBelowThreshold { success: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, TransferError>;
