use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Body, Joint, JointKind, MatchedSpace, Param, RobotError, RobotSpec, Result};
use crate::geometry::Point;

/// Values this close to the hull boundary (relative to the dimension's
/// scale) are clamped onto it instead of rejected.
const HULL_TOLERANCE: f64 = 1e-9;
/// `alpha` snaps to a robot's exact parameter value within this distance.
const SNAP_TOLERANCE: f64 = 1e-12;

/// Element-wise bounds of a set of parameter vectors.
pub fn compute_bounds(thetas: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = thetas
        .first()
        .ok_or_else(|| RobotError::InvalidInput("no parameter vectors".into()))?;
    let dim = first.len();
    if thetas.iter().any(|t| t.len() != dim) {
        return Err(RobotError::InvalidInput("parameter vectors differ in length".into()));
    }
    let mut lo = first.clone();
    let mut hi = first.clone();
    for t in &thetas[1..] {
        for d in 0..dim {
            lo[d] = lo[d].min(t[d]);
            hi[d] = hi[d].max(t[d]);
        }
    }
    Ok((lo, hi))
}

/// The box `[theta_lower, theta_upper]` with its affine map to `[0,1]^D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpace {
    pub keys: Vec<String>,
    pub units: Vec<String>,
    pub theta_lower: Vec<f64>,
    pub theta_upper: Vec<f64>,
}

impl EvolutionSpace {
    pub fn new(keys: Vec<String>, theta_lower: Vec<f64>, theta_upper: Vec<f64>) -> Result<Self> {
        let d = keys.len();
        if theta_lower.len() != d || theta_upper.len() != d {
            return Err(RobotError::InvalidInput("bounds and keys differ in length".into()));
        }
        if theta_lower.iter().zip(&theta_upper).any(|(l, u)| !(l <= u)) {
            return Err(RobotError::InvalidInput("theta_lower must not exceed theta_upper".into()));
        }
        Ok(EvolutionSpace {
            units: vec![String::new(); d],
            keys,
            theta_lower,
            theta_upper,
        })
    }

    pub fn from_matched(m: &MatchedSpace) -> Result<Self> {
        let (lo, hi) = compute_bounds(&m.thetas)?;
        let mut s = Self::new(m.keys.clone(), lo, hi)?;
        s.units = m.units.clone();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    pub fn is_pinned(&self, d: usize) -> bool {
        self.theta_lower[d] == self.theta_upper[d]
    }

    /// Dimensions with non-zero width.
    pub fn active_dims(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&d| !self.is_pinned(d)).collect()
    }

    pub fn key_index(&self, key: &str) -> Option<usize> {
        self.keys.iter().position(|k| k == key)
    }

    /// `theta -> alpha`; zero-width dimensions map to 0.
    pub fn normalize(&self, theta: &[f64]) -> Result<Point> {
        if theta.len() != self.dim() {
            return Err(RobotError::InvalidInput(format!(
                "expected {} parameters, got {}",
                self.dim(),
                theta.len()
            )));
        }
        let mut alpha = Vec::with_capacity(self.dim());
        for (d, &t) in theta.iter().enumerate() {
            let (lo, hi) = (self.theta_lower[d], self.theta_upper[d]);
            let tol = HULL_TOLERANCE * lo.abs().max(hi.abs()).max(1.0);
            if !t.is_finite() || t < lo - tol || t > hi + tol {
                return Err(RobotError::OutOfHull {
                    dim: d,
                    key: self.keys[d].clone(),
                    value: t,
                });
            }
            alpha.push(if hi == lo {
                0.0
            } else {
                ((t - lo) / (hi - lo)).clamp(0.0, 1.0)
            });
        }
        Ok(Point::new(alpha))
    }

    /// `alpha -> theta = (1 - alpha) * lower + alpha * upper`.
    pub fn denormalize(&self, alpha: &Point) -> Result<Vec<f64>> {
        self.check_alpha(alpha)?;
        Ok((0..self.dim())
            .map(|d| {
                let (lo, hi) = (self.theta_lower[d], self.theta_upper[d]);
                if lo == hi {
                    lo
                } else {
                    (1.0 - alpha[d]) * lo + alpha[d] * hi
                }
            })
            .collect())
    }

    fn check_alpha(&self, alpha: &Point) -> Result<()> {
        if alpha.dim() != self.dim() {
            return Err(RobotError::InvalidInput(format!(
                "expected {}-dimensional alpha, got {}",
                self.dim(),
                alpha.dim()
            )));
        }
        for d in 0..self.dim() {
            if !(0.0..=1.0).contains(&alpha[d]) {
                return Err(RobotError::OutOfHull {
                    dim: d,
                    key: self.keys[d].clone(),
                    value: alpha[d],
                });
            }
        }
        Ok(())
    }

    /// Normalized coordinates of every matched robot, in robot order.
    pub fn robot_alphas(&self, matched: &MatchedSpace) -> Result<Vec<Point>> {
        matched.thetas.iter().map(|t| self.normalize(t)).collect()
    }

    /// Concrete robot at `alpha`.
    ///
    /// Parameters follow [`denormalize`](Self::denormalize), snapping each
    /// dimension to a matched robot's exact value when `alpha` sits on that
    /// robot's coordinate, so input robots are reproduced bit for bit.
    /// Joint ranges are interpolated piecewise-linearly between the robots'
    /// ranges, driven by the mean `alpha` of the owning body's parameters
    /// (of all active parameters when the body has none).
    pub fn instantiate(&self, alpha: &Point, matched: &MatchedSpace, name: &str) -> Result<RobotSpec> {
        if matched.keys != self.keys {
            return Err(RobotError::InvalidInput("space and matched keys differ".into()));
        }
        let mut theta = self.denormalize(alpha)?;
        let robot_alphas = self.robot_alphas(matched)?;
        for d in 0..self.dim() {
            if let Some(i) = robot_alphas
                .iter()
                .position(|a| (a[d] - alpha[d]).abs() <= SNAP_TOLERANCE)
            {
                theta[d] = matched.thetas[i][d];
            }
        }

        let active = self.active_dims();
        let gate = |body: &str, a: &Point| -> f64 {
            let prefix = format!("body.{body}.");
            let dims: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&d| self.keys[d].starts_with(&prefix))
                .collect();
            let dims = if dims.is_empty() { active.clone() } else { dims };
            if dims.is_empty() {
                0.0
            } else {
                dims.iter().map(|&d| a[d]).sum::<f64>() / dims.len() as f64
            }
        };

        let bodies = matched
            .bodies
            .iter()
            .map(|b| {
                let g = gate(&b.id, alpha);
                let knots: Vec<f64> = robot_alphas.iter().map(|a| gate(&b.id, a)).collect();
                let joints = b
                    .joints
                    .iter()
                    .map(|j| {
                        let ranges: Vec<[f64; 2]> = (0..matched.robots.len()).map(|i| j.range_of(i)).collect();
                        let range = piecewise(&knots, &ranges, g);
                        Joint {
                            name: j.name.clone(),
                            kind: if range[1] > range[0] { j.kind } else { JointKind::Frozen },
                            range,
                        }
                    })
                    .collect();
                Body {
                    id: b.id.clone(),
                    parent: b.parent.clone(),
                    joints,
                }
            })
            .collect();
        let params: BTreeMap<String, Param> = self
            .keys
            .iter()
            .zip(&self.units)
            .zip(&theta)
            .map(|((k, u), &v)| {
                (
                    k.clone(),
                    Param {
                        value: v,
                        unit: u.clone(),
                    },
                )
            })
            .collect();
        Ok(RobotSpec {
            name: name.to_string(),
            bodies,
            params,
            correspondence: BTreeMap::new(),
        })
    }
}

/// Piecewise-linear interpolation of ranges over scalar knots. Ranges that
/// share a knot are averaged; outside the knot span the end value holds.
fn piecewise(knots: &[f64], ranges: &[[f64; 2]], x: f64) -> [f64; 2] {
    let mut pts: Vec<(f64, [f64; 2], usize)> = Vec::new();
    let mut order: Vec<usize> = (0..knots.len()).collect();
    order.sort_by(|&a, &b| knots[a].total_cmp(&knots[b]));
    for i in order {
        match pts.last_mut() {
            Some((k, r, n)) if (*k - knots[i]).abs() <= SNAP_TOLERANCE => {
                r[0] += ranges[i][0];
                r[1] += ranges[i][1];
                *n += 1;
            }
            _ => pts.push((knots[i], ranges[i], 1)),
        }
    }
    let pts: Vec<(f64, [f64; 2])> = pts
        .into_iter()
        .map(|(k, r, n)| (k, [r[0] / n as f64, r[1] / n as f64]))
        .collect();
    if let Some(&(_, r)) = pts.iter().find(|(k, _)| (k - x).abs() <= SNAP_TOLERANCE) {
        return r;
    }
    if x <= pts[0].0 {
        return pts[0].1;
    }
    if x >= pts[pts.len() - 1].0 {
        return pts[pts.len() - 1].1;
    }
    let j = pts.iter().position(|(k, _)| *k > x).expect("x inside knot span");
    let (k0, r0) = pts[j - 1];
    let (k1, r1) = pts[j];
    let t = (x - k0) / (k1 - k0);
    [r0[0] + t * (r1[0] - r0[0]), r0[1] + t * (r1[1] - r0[1])]
}
