use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Result, TransferError};
use crate::geometry::Norm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    /// Step length per phase, measured in `p_norm`.
    pub xi: f64,
    /// Weight of the attraction toward the meta robot; at least 1.
    pub lambda: f64,
    /// Norm of the evolution tree and of step lengths.
    pub p_norm: Norm,
    /// Norm of the attraction penalty in the step objective.
    pub penalty_norm: Norm,
    /// Success rate needed to advance to the next phase.
    pub success_threshold: f64,
    /// Success rate a finished target must reach before its transfer counts
    /// as done.
    pub final_success: f64,
    pub shrink_ratio: f64,
    /// Perturbations per reward-gradient estimate; 0 disables the gradient.
    pub gradient_samples: usize,
    /// Training iterations allowed per phase before giving up.
    pub max_phase_iterations: usize,
    /// Phases allowed per branch before giving up.
    pub max_phases: usize,
    /// Episodes per success-rate evaluation.
    pub eval_episodes: usize,
    pub seed: u64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Preset::TableDefaults.config()
    }
}

impl TransferConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TransferError::Config(m.to_string()));
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return bad("xi must be positive");
        }
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return bad("lambda must be at least 1");
        }
        if !(self.success_threshold > 0.0 && self.success_threshold < 1.0) {
            return bad("success_threshold must lie in (0, 1)");
        }
        if !(self.final_success > 0.0 && self.final_success <= 1.0) {
            return bad("final_success must lie in (0, 1]");
        }
        if !(self.shrink_ratio > 0.0 && self.shrink_ratio <= 1.0) {
            return bad("shrink_ratio must lie in (0, 1]");
        }
        if self.max_phase_iterations == 0 || self.max_phases == 0 {
            return bad("iteration and phase budgets must be positive");
        }
        if self.eval_episodes == 0 {
            return bad("eval_episodes must be positive");
        }
        Ok(())
    }
}

/// Named hyperparameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// The published hyperparameter table: xi 0.03, 72 gradient samples.
    TableDefaults,
    /// The experimental-design search results: xi 0.06, 12 gradient samples
    /// (the locomotion count; the toy space has the same dimension).
    ExpdesignDefaults,
}

impl Preset {
    pub fn config(self) -> TransferConfig {
        let table = TransferConfig {
            xi: 0.03,
            lambda: 1.0,
            p_norm: Norm::L1,
            penalty_norm: Norm::L2,
            success_threshold: 0.667,
            final_success: 0.8,
            shrink_ratio: 0.995,
            gradient_samples: 72,
            max_phase_iterations: 300,
            max_phases: 10_000,
            eval_episodes: 30,
            seed: 0,
        };
        match self {
            Preset::TableDefaults => table,
            Preset::ExpdesignDefaults => TransferConfig {
                xi: 0.06,
                gradient_samples: 12,
                ..table
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::TableDefaults => "table-defaults",
            Preset::ExpdesignDefaults => "expdesign-defaults",
        })
    }
}

impl FromStr for Preset {
    type Err = TransferError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table-defaults" => Ok(Preset::TableDefaults),
            "expdesign-defaults" => Ok(Preset::ExpdesignDefaults),
            _ => Err(TransferError::Config(format!("unknown preset `{s}`"))),
        }
    }
}
