use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PhaseRecord, Result, TransferConfig, TransferError};
use crate::geometry::{Norm, Point};
use crate::trainers::Cost;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Meta,
    Herd,
    GeomMedian,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Meta => "meta",
            Method::Herd => "herd",
            Method::GeomMedian => "geom-median",
        })
    }
}

impl FromStr for Method {
    type Err = TransferError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "meta" => Ok(Method::Meta),
            "herd" => Ok(Method::Herd),
            "geom-median" => Ok(Method::GeomMedian),
            _ => Err(TransferError::Config(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    BudgetExhausted,
}

/// A maximal run of phases shared by the same set of targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub parent: Option<usize>,
    /// Targets whose paths run through this branch.
    pub targets: Vec<usize>,
    pub start: Point,
    pub end: Point,
    pub phases: Vec<PhaseRecord>,
    /// Training at the target once reached; only on leaf branches.
    pub finish: Option<PhaseRecord>,
    pub outcome: Outcome,
}

impl Branch {
    pub fn cost(&self) -> Cost {
        self.phases.iter().chain(&self.finish).map(PhaseRecord::cost).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetPath {
    pub target: usize,
    /// Branch ids from the root to the leaf.
    pub branches: Vec<usize>,
    pub outcome: Outcome,
    /// Success rate at the target after the final training, if reached.
    pub final_success_rate: Option<f64>,
}

/// Outcome of one transfer run from a source to a set of targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub schema: u32,
    pub method: Method,
    pub config: TransferConfig,
    /// Names of the evolution-space dimensions, when known.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keys: Vec<String>,
    pub source: Point,
    pub targets: Vec<Point>,
    pub branches: Vec<Branch>,
    pub paths: Vec<TargetPath>,
    /// Every branch counted once, so shared phases are paid once.
    pub totals: Cost,
    pub outcome: Outcome,
}

impl TransferReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: TransferReport =
            serde_json::from_str(text).map_err(|e| TransferError::Config(format!("malformed report: {e}")))?;
        if r.schema != SCHEMA_VERSION {
            return Err(TransferError::Config(format!("unsupported report schema {}", r.schema)));
        }
        r.validate()?;
        Ok(r)
    }

    /// Evolution phases on the path to `target`, in order.
    pub fn path_phases(&self, target: usize) -> Vec<&PhaseRecord> {
        self.paths[target]
            .branches
            .iter()
            .flat_map(|&b| &self.branches[b].phases)
            .collect()
    }

    /// Phase-level identity of a target's path: (branch id, index in branch).
    pub fn path_phase_ids(&self, target: usize) -> Vec<(usize, usize)> {
        self.paths[target]
            .branches
            .iter()
            .flat_map(|&b| (0..self.branches[b].phases.len()).map(move |i| (b, i)))
            .collect()
    }

    /// Number of phases two targets' paths share before they separate.
    pub fn split_phase(&self, a: usize, b: usize) -> usize {
        self.paths[a]
            .branches
            .iter()
            .zip(&self.paths[b].branches)
            .take_while(|(x, y)| x == y)
            .map(|(&x, _)| self.branches[x].phases.len())
            .sum()
    }

    /// Cost of reaching `target` as if its path were run alone.
    pub fn path_cost(&self, target: usize) -> Cost {
        self.paths[target].branches.iter().map(|&b| self.branches[b].cost()).sum()
    }

    pub fn phase_count(&self) -> usize {
        self.branches.iter().map(|b| b.phases.len()).sum()
    }

    /// Total distance walked, each branch once.
    pub fn walked_length(&self, norm: Norm) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| &b.phases)
            .map(|p| norm.of(&p.alpha_to.sub(&p.alpha_from)))
            .sum()
    }

    /// Checks internal consistency: totals, path structure and continuity.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TransferError::Config(format!("inconsistent report: {m}")));
        let total: Cost = self.branches.iter().map(Branch::cost).sum();
        if total != self.totals {
            return bad(format!("totals {:?} differ from branch sum {total:?}", self.totals));
        }
        if self.paths.len() != self.targets.len() {
            return bad("one path per target expected".into());
        }
        for (i, b) in self.branches.iter().enumerate() {
            if b.id != i || b.parent.is_some_and(|p| p >= i) {
                return bad(format!("branch {i} is misnumbered"));
            }
            let mut at = &b.start;
            for p in &b.phases {
                if &p.alpha_from != at {
                    return bad(format!("branch {i} phases are not contiguous"));
                }
                at = &p.alpha_to;
            }
            if at != &b.end {
                return bad(format!("branch {i} does not end at its last phase"));
            }
        }
        for (t, p) in self.paths.iter().enumerate() {
            if p.target != t || p.branches.is_empty() {
                return bad(format!("path {t} is malformed"));
            }
            for w in p.branches.windows(2) {
                if self.branches[w[1]].parent != Some(w[0]) {
                    return bad(format!("path {t} skips a branch"));
                }
            }
            if p.branches.iter().any(|&b| !self.branches[b].targets.contains(&t)) {
                return bad(format!("path {t} runs through a branch not serving it"));
            }
        }
        Ok(())
    }
}
