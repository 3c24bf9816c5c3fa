//! Trainer contract and its two implementations: a fixed-cost model for
//! plan-level accounting and a toy point-mass MDP with a policy-gradient
//! learner.

mod cost;
mod policy;
pub mod toy;

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

pub use cost::CostModelTrainer;
pub use policy::{pg_train_step, policy_gradient, EpisodeRecord, LinearGaussianPolicy};
pub use toy::{ToyConfig, ToyParams, ToyTrainer};

/// Seed of the `index`-th independent child stream of `seed`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    use rand::{Rng, SeedableRng};
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r.random()
}

#[derive(Debug, thiserror::Error)]
pub enum TrainerError {
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, TrainerError>;

/// Optimizer updates and environment episodes spent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cost {
    pub train_iterations: u64,
    pub sim_episodes: u64,
}

impl Cost {
    pub fn new(train_iterations: u64, sim_episodes: u64) -> Self {
        Cost {
            train_iterations,
            sim_episodes,
        }
    }

    pub fn episodes(sim_episodes: u64) -> Self {
        Cost::new(0, sim_episodes)
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost::new(self.train_iterations + o.train_iterations, self.sim_episodes + o.sim_episodes)
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, o: Cost) {
        *self = *self + o;
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::default(), Add::add)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub success_rate: f64,
    pub episodes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub value: f64,
    pub episodes: u64,
}

/// Segment of evolution parameters that training robots are drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub start: Point,
    pub end: Point,
}

impl Window {
    pub fn new(start: Point, end: Point) -> Self {
        Window { start, end }
    }

    /// Robot at fraction `t` of the way from `start` to `end`.
    pub fn at(&self, t: f64) -> Point {
        self.start.lerp(&self.end, t)
    }
}

/// What the transfer engine needs from a learner.
///
/// All randomness comes from the explicit `seed`, so every call is a pure
/// function of its arguments.
pub trait Trainer {
    type Policy: Clone;

    /// Success fraction of `policy` on the robot at `alpha`.
    fn evaluate(&self, policy: &Self::Policy, alpha: &Point, episodes: usize, seed: u64) -> Result<Evaluation>;

    /// One optimizer update on robots sampled from `window`.
    fn train_step(&self, policy: &mut Self::Policy, window: &Window, seed: u64) -> Result<Cost>;

    /// Dense expected-return proxy at `alpha`, used for reward gradients.
    fn gradient_probe(&self, policy: &Self::Policy, alpha: &Point, seed: u64) -> Result<Probe>;
}
