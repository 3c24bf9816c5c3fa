//! Geometric primitives over normalized evolution coordinates.
//!
//! Everything here is a pure function of its inputs. Points live in `R^D`
//! and distances are measured in either the L1 (Manhattan) or L2 (Euclidean)
//! norm. The Steiner solvers return a [`Tree`] whose first vertices are the
//! (deduplicated) terminals in input order, followed by Steiner vertices.

mod euclidean;
mod fermat;
mod median;
mod mst;
mod rectilinear;
mod tree;

use std::fmt;
use std::ops::{Deref, Index};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fermat::fermat_point;
pub use median::geometric_median;
pub use mst::minimum_spanning_tree;
pub use tree::{tree_length, Tree};

/// Points closer than this (in the tree norm) are considered the same vertex.
pub const MERGE_TOLERANCE: f64 = 1e-9;

/// Upper bound on the number of candidate trees the exact solvers may score.
pub const EXACT_BUDGET: u64 = 2_000_000;

/// Largest terminal count accepted by [`SteinerMode::ExactSmall`].
pub const EXACT_MAX_TERMINALS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("exact solve budget exceeded: {0}")]
    BudgetExceeded(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// A point in `R^D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// Builds a point, rejecting empty or non-finite coordinate vectors.
    pub fn try_new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GeometryError::InvalidInput("point has no coordinates".into()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(GeometryError::InvalidInput(format!(
                "coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sub(&self, other: &Point) -> Vec<f64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    /// `self + t * dir`
    pub fn offset(&self, dir: &[f64], t: f64) -> Point {
        Point(self.0.iter().zip(dir).map(|(a, d)| a + t * d).collect())
    }

    /// Linear interpolation `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// True when every coordinate is inside `[0, 1]`.
    pub fn in_unit_cube(&self) -> bool {
        self.0.iter().all(|c| (0.0..=1.0).contains(c))
    }

    pub(crate) fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(v.to_vec())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Distance norm used for trees and medians.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn from_p(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Norm::L1),
            2 => Ok(Norm::L2),
            other => Err(GeometryError::InvalidInput(format!(
                "unsupported norm p={other}; expected 1 or 2"
            ))),
        }
    }

    pub fn p(self) -> u32 {
        match self {
            Norm::L1 => 1,
            Norm::L2 => 2,
        }
    }

    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::L1 => f.write_str("l1"),
            Norm::L2 => f.write_str("l2"),
        }
    }
}

impl FromStr for Norm {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "1" => Ok(Norm::L1),
            "l2" | "2" => Ok(Norm::L2),
            other => Err(GeometryError::InvalidInput(format!("unknown norm '{other}'"))),
        }
    }
}

/// Lp distance between two points of equal dimension.
pub fn lp_distance(a: &Point, b: &Point, norm: Norm) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(GeometryError::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(dist(a, b, norm))
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        Norm::L2 => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
    }
}

/// Checks that a point set is non-empty, finite and of uniform dimension.
pub(crate) fn check_points(points: &[Point]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| GeometryError::InvalidInput("empty point set".into()))?;
    let dim = first.dim();
    if dim == 0 {
        return Err(GeometryError::InvalidInput("points have dimension 0".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if p.dim() != dim {
            return Err(GeometryError::InvalidInput(format!(
                "dimension mismatch: point {i} has {} coordinates, expected {dim}",
                p.dim()
            )));
        }
        if !p.is_finite() {
            return Err(GeometryError::InvalidInput(format!("point {i} is not finite")));
        }
    }
    Ok(dim)
}

/// Solver selection for [`steiner_tree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteinerMode {
    /// Exhaustive search; limited to small terminal sets.
    ExactSmall,
    /// Polynomial-time heuristic.
    Heuristic,
    /// Exact when the search fits the budget, heuristic otherwise.
    Auto,
}

/// Computes an Lp Steiner tree interconnecting `terminals`.
///
/// For L1 the Steiner points are drawn from the Hanan grid of the terminals:
/// the exact mode scores every subset of at most `N - 2` grid points, the
/// heuristic inserts grid points one at a time while the spanning-tree length
/// keeps dropping. For L2 the exact mode enumerates every full Steiner
/// topology and optimizes its Steiner points; the heuristic starts from the
/// spanning tree and greedily inserts Fermat points at sharp corners. Both
/// L2 paths finish with a joint Newton polish so that Steiner vertices meet
/// their neighbours at 120 degrees.
pub fn steiner_tree(terminals: &[Point], norm: Norm, mode: SteinerMode) -> Result<Tree> {
    check_points(terminals)?;
    let (unique, map) = dedup(terminals);
    let core = match (norm, mode) {
        (Norm::L1, SteinerMode::ExactSmall) => rectilinear::exact(&unique)?,
        (Norm::L1, SteinerMode::Heuristic) => rectilinear::heuristic(&unique),
        (Norm::L1, SteinerMode::Auto) => match rectilinear::exact(&unique) {
            Ok(t) => t,
            Err(GeometryError::BudgetExceeded(_)) => rectilinear::heuristic(&unique),
            Err(e) => return Err(e),
        },
        (Norm::L2, SteinerMode::ExactSmall) => euclidean::exact(&unique)?,
        (Norm::L2, SteinerMode::Heuristic) => euclidean::heuristic(&unique),
        (Norm::L2, SteinerMode::Auto) => {
            if unique.len() <= EXACT_MAX_TERMINALS {
                euclidean::exact(&unique)?
            } else {
                euclidean::heuristic(&unique)
            }
        }
    };
    Ok(core.with_terminal_map(map))
}

/// Like [`steiner_tree`] in auto mode, but among equal-length L1 optima
/// prefers trees that give terminal `prefer` the most neighbours.
pub(crate) fn steiner_tree_preferring(terminals: &[Point], norm: Norm, prefer: usize) -> Result<Tree> {
    check_points(terminals)?;
    let (unique, map) = dedup(terminals);
    let prefer = map[prefer];
    let core = match norm {
        Norm::L1 => match rectilinear::exact_preferring(&unique, Some(prefer)) {
            Ok(t) => t,
            Err(GeometryError::BudgetExceeded(_)) => {
                rectilinear::heuristic_preferring(&unique, Some(prefer))
            }
            Err(e) => return Err(e),
        },
        Norm::L2 => {
            if unique.len() <= EXACT_MAX_TERMINALS {
                euclidean::exact(&unique)?
            } else {
                euclidean::heuristic(&unique)
            }
        }
    };
    Ok(core.with_terminal_map(map))
}

/// Collapses terminals closer than [`MERGE_TOLERANCE`]; returns the unique
/// points and, for every input terminal, the index of its representative.
pub(crate) fn dedup(points: &[Point]) -> (Vec<Point>, Vec<usize>) {
    let mut unique: Vec<Point> = Vec::with_capacity(points.len());
    let mut map = Vec::with_capacity(points.len());
    for p in points {
        match unique
            .iter()
            .position(|u| dist(u, p, Norm::L1) <= MERGE_TOLERANCE)
        {
            Some(i) => map.push(i),
            None => {
                map.push(unique.len());
                unique.push(p.clone());
            }
        }
    }
    (unique, map)
}
