use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CliError, Result};
use crate::geometry::Point;
use crate::robot::{match_kinematics, EvolutionSpace, MatchedSpace, RobotError, RobotSpec};

/// Normalized coordinates given directly, bypassing robot specs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub schema: u32,
    pub source: Point,
    pub targets: Vec<Point>,
}

/// Source and targets of a run, in normalized coordinates.
#[derive(Clone, Debug)]
pub enum Inputs {
    Robots {
        files: Vec<PathBuf>,
        matched: MatchedSpace,
        space: EvolutionSpace,
        alphas: Vec<Point>,
    },
    Points(PointSet),
}

impl Inputs {
    pub fn from_robots(files: &[PathBuf]) -> Result<Self> {
        // Report every broken file, not just the first.
        let mut specs = Vec::new();
        let mut errors = Vec::new();
        for f in files {
            match RobotSpec::load(f) {
                Ok(s) => specs.push(s),
                Err(e) => errors.push(e.to_string()),
            }
        }
        if !errors.is_empty() {
            return Err(CliError::Input(errors.join("\n")));
        }
        let matched = match_kinematics(&specs)?;
        let space = EvolutionSpace::from_matched(&matched)?;
        let alphas = space.robot_alphas(&matched)?;
        Ok(Inputs::Robots {
            files: files.to_vec(),
            matched,
            space,
            alphas,
        })
    }

    pub fn from_points(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RobotError::Io {
            file: path.display().to_string(),
            source: e,
        })?;
        let bad = |m: String| CliError::Input(format!("{}: {m}", path.display()));
        let set: PointSet = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if set.schema != 1 {
            return Err(bad(format!("unsupported schema {}", set.schema)));
        }
        if set.targets.is_empty() {
            return Err(bad("no targets".into()));
        }
        let dim = set.source.dim();
        for (i, p) in std::iter::once(&set.source).chain(&set.targets).enumerate() {
            if p.dim() != dim || dim == 0 {
                return Err(bad(format!("point {i} has dimension {} (expected {dim})", p.dim())));
            }
            if !p.is_finite() || !p.in_unit_cube() {
                return Err(bad(format!("point {i} lies outside [0,1]^D")));
            }
        }
        Ok(Inputs::Points(set))
    }

    pub fn source(&self) -> &Point {
        match self {
            Inputs::Robots { alphas, .. } => &alphas[0],
            Inputs::Points(s) => &s.source,
        }
    }

    pub fn targets(&self) -> &[Point] {
        match self {
            Inputs::Robots { alphas, .. } => &alphas[1..],
            Inputs::Points(s) => &s.targets,
        }
    }

    /// Dimension names, or `alpha[i]` when there are none.
    pub fn keys(&self) -> Vec<String> {
        match self {
            Inputs::Robots { space, .. } => space.keys.clone(),
            Inputs::Points(s) => (0..s.source.dim()).map(|i| format!("alpha[{i}]")).collect(),
        }
    }

    pub fn names(&self) -> Vec<String> {
        match self {
            Inputs::Robots { matched, .. } => matched.robots.clone(),
            Inputs::Points(s) => std::iter::once("source".to_string())
                .chain((0..s.targets.len()).map(|i| format!("target{i}")))
                .collect(),
        }
    }
}
