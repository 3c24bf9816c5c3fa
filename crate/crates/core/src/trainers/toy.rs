//! Point mass on a plane pushed toward a goal by two gain-scaled actuators.
//!
//! Robot parameters `(mass, gain_x, gain_y, damping, actuator_limit)` enter
//! the transition function, so moving through the evolution space changes
//! the dynamics the policy has to cope with.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    child_seed, pg_train_step, Cost, EpisodeRecord, Evaluation, LinearGaussianPolicy, Probe, Result, Trainer,
    TrainerError, Window,
};
use crate::geometry::Point;
use crate::robot::EvolutionSpace;

/// Parameter keys the toy trainer reads from an evolution space.
pub const PARAM_KEYS: [&str; 5] = ["mass", "gain_x", "gain_y", "damping", "actuator_limit"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    pub mass: f64,
    pub gain: [f64; 2],
    pub damping: f64,
    pub actuator_limit: f64,
}

impl ToyParams {
    pub fn from_theta(theta: &[f64; 5]) -> ToyParams {
        ToyParams {
            mass: theta[0],
            gain: [theta[1], theta[2]],
            damping: theta[3],
            actuator_limit: theta[4],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.mass > 0.0
            && self.damping >= 0.0
            && self.actuator_limit >= 0.0
            && [self.mass, self.gain[0], self.gain[1], self.damping, self.actuator_limit]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(TrainerError::Simulation(format!("invalid robot parameters {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ToyState {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub dt: f64,
    pub horizon: usize,
    pub goal: [f64; 2],
    pub goal_radius: f64,
    /// Initial positions are uniform in `[-spread, spread]^2`.
    pub start_spread: f64,
    pub batch_size: usize,
    pub step_size: f64,
    /// Deterministic rollouts averaged per gradient probe.
    pub probe_rollouts: usize,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            dt: 0.05,
            horizon: 200,
            goal: [1.0, 0.5],
            goal_radius: 0.1,
            start_spread: 0.05,
            batch_size: 12,
            step_size: 0.05,
            probe_rollouts: 4,
        }
    }
}

/// One Euler step: `x' = x + v dt`, `v' = v + dt (gain * clip(a) - damping v) / mass`.
pub fn step(state: &ToyState, action: &[f64], p: &ToyParams, dt: f64) -> Result<ToyState> {
    if action.iter().chain(&state.pos).chain(&state.vel).any(|v| !v.is_finite()) {
        return Err(TrainerError::Simulation("non-finite state or action".into()));
    }
    let mut next = *state;
    for i in 0..2 {
        let a = action[i].clamp(-p.actuator_limit, p.actuator_limit);
        next.pos[i] = state.pos[i] + state.vel[i] * dt;
        next.vel[i] = state.vel[i] + dt * (p.gain[i] * a - p.damping * state.vel[i]) / p.mass;
    }
    next.step = state.step + 1;
    Ok(next)
}

/// Policy features: goal offset and negated velocity.
pub fn features(state: &ToyState, goal: &[f64; 2]) -> Vec<f64> {
    vec![
        goal[0] - state.pos[0],
        goal[1] - state.pos[1],
        -state.vel[0],
        -state.vel[1],
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub success: bool,
    /// Sparse return: 1 on success, else 0.
    pub ret: f64,
    /// Mean distance to the goal over the episode.
    pub mean_distance: f64,
    pub record: EpisodeRecord,
    pub states: Vec<ToyState>,
}

/// Simulates one episode. With `explore` false the policy mean is used.
pub fn rollout(
    policy: &LinearGaussianPolicy,
    params: &ToyParams,
    cfg: &ToyConfig,
    seed: u64,
    explore: bool,
) -> Result<Rollout> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ToyState {
        pos: [
            rng.random_range(-cfg.start_spread..=cfg.start_spread),
            rng.random_range(-cfg.start_spread..=cfg.start_spread),
        ],
        ..Default::default()
    };
    let dist = |s: &ToyState| ((s.pos[0] - cfg.goal[0]).powi(2) + (s.pos[1] - cfg.goal[1]).powi(2)).sqrt();
    let mut record = EpisodeRecord::default();
    let mut states = vec![s];
    let mut success = dist(&s) < cfg.goal_radius;
    let mut total_distance = 0.0;
    for _ in 0..cfg.horizon {
        let phi = features(&s, &cfg.goal);
        let a = if explore { policy.sample(&phi, &mut rng) } else { policy.mean(&phi) };
        s = step(&s, &a, params, cfg.dt)?;
        record.features.push(phi);
        record.actions.push(a);
        states.push(s);
        let d = dist(&s);
        total_distance += d;
        success |= d < cfg.goal_radius;
    }
    let ret = if success { 1.0 } else { 0.0 };
    record.ret = ret;
    Ok(Rollout {
        success,
        ret,
        mean_distance: total_distance / cfg.horizon.max(1) as f64,
        record,
        states,
    })
}

/// Toy-MDP trainer over an evolution space containing [`PARAM_KEYS`].
#[derive(Clone, Debug)]
pub struct ToyTrainer {
    pub space: EvolutionSpace,
    pub cfg: ToyConfig,
    index: [usize; 5],
}

impl ToyTrainer {
    pub fn new(space: EvolutionSpace, cfg: ToyConfig) -> Result<Self> {
        let mut index = [0; 5];
        for (slot, key) in index.iter_mut().zip(PARAM_KEYS) {
            *slot = space
                .key_index(key)
                .ok_or_else(|| TrainerError::InvalidInput(format!("evolution space lacks `{key}`")))?;
        }
        Ok(ToyTrainer { space, cfg, index })
    }

    pub fn params_at(&self, alpha: &Point) -> Result<ToyParams> {
        let theta = self
            .space
            .denormalize(alpha)
            .map_err(|e| TrainerError::InvalidInput(e.to_string()))?;
        Ok(ToyParams::from_theta(&self.index.map(|i| theta[i])))
    }

    /// Hand-tuned PD controller with small exploration noise.
    pub fn expert(kp: f64, kd: f64, log_std: f64) -> LinearGaussianPolicy {
        let mut p = LinearGaussianPolicy::zeros(2, 4, log_std);
        p.weights = vec![kp, 0.0, kd, 0.0, 0.0, kp, 0.0, kd];
        p
    }
}

impl Trainer for ToyTrainer {
    type Policy = LinearGaussianPolicy;

    fn evaluate(&self, policy: &LinearGaussianPolicy, alpha: &Point, episodes: usize, seed: u64) -> Result<Evaluation> {
        let params = self.params_at(alpha)?;
        let mut wins = 0;
        for e in 0..episodes {
            wins += rollout(policy, &params, &self.cfg, child_seed(seed, e as u64), true)?.success as usize;
        }
        Ok(Evaluation {
            success_rate: if episodes == 0 { 0.0 } else { wins as f64 / episodes as f64 },
            episodes: episodes as u64,
        })
    }

    fn train_step(&self, policy: &mut LinearGaussianPolicy, window: &Window, seed: u64) -> Result<Cost> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut batch = Vec::with_capacity(self.cfg.batch_size);
        for _ in 0..self.cfg.batch_size {
            let alpha = window.at(rng.random());
            let params = self.params_at(&alpha)?;
            batch.push(rollout(policy, &params, &self.cfg, rng.random(), true)?.record);
        }
        *policy = pg_train_step(policy, &batch, self.cfg.step_size)?;
        Ok(Cost::new(1, self.cfg.batch_size as u64))
    }

    fn gradient_probe(&self, policy: &LinearGaussianPolicy, alpha: &Point, seed: u64) -> Result<Probe> {
        let params = self.params_at(alpha)?;
        let mut total = 0.0;
        for r in 0..self.cfg.probe_rollouts {
            total -= rollout(policy, &params, &self.cfg, child_seed(seed, r as u64), false)?.mean_distance;
        }
        Ok(Probe {
            value: total / self.cfg.probe_rollouts.max(1) as f64,
            episodes: self.cfg.probe_rollouts as u64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source() -> ToyParams {
        ToyParams::from_theta(&[1.0, 1.0, 1.0, 1.0, 1.0])
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let s = ToyState {
            pos: [0.3, -0.2],
            vel: [0.0, 0.0],
            step: 4,
        };
        let n = step(&s, &[0.0, 0.0], &source(), 0.05).unwrap();
        assert_eq!(n.pos, s.pos);
        assert_eq!(n.vel, s.vel);
        assert_eq!(n.step, 5);
    }

    #[test]
    fn damping_slows_and_mass_scales() {
        let s = ToyState {
            pos: [0.0, 0.0],
            vel: [0.5, -0.4],
            step: 0,
        };
        let mut last = f64::INFINITY;
        for damping in [0.0, 0.5, 1.0, 4.0, 16.0] {
            let p = ToyParams { damping, ..source() };
            let n = step(&s, &[0.3, 0.3], &p, 0.05).unwrap();
            let speed = n.vel[0].hypot(n.vel[1]);
            assert!(speed < last);
            last = speed;
        }
        let rest = ToyState::default();
        let p1 = ToyParams { damping: 0.0, ..source() };
        let p2 = ToyParams { mass: 2.0, ..p1 };
        let d1 = step(&rest, &[0.5, 0.2], &p1, 0.05).unwrap().vel;
        let d2 = step(&rest, &[0.5, 0.2], &p2, 0.05).unwrap().vel;
        assert!((d1[0] - 2.0 * d2[0]).abs() < 1e-15 && (d1[1] - 2.0 * d2[1]).abs() < 1e-15);
    }

    #[test]
    fn actions_are_clipped() {
        let p = ToyParams { actuator_limit: 0.2, damping: 0.0, ..source() };
        let a = step(&ToyState::default(), &[5.0, -5.0], &p, 0.05).unwrap().vel;
        assert!((a[0] - 0.01).abs() < 1e-15 && (a[1] + 0.01).abs() < 1e-15);
    }

    #[test]
    fn dynamics_are_continuous_in_parameters() {
        let s = ToyState { pos: [0.1, 0.2], vel: [0.3, -0.1], step: 0 };
        let base = step(&s, &[0.4, -0.2], &source(), 0.05).unwrap();
        for h in [1e-2, 1e-4, 1e-6] {
            let p = ToyParams { mass: 1.0 + h, gain: [1.0 + h, 1.0 - h], damping: 1.0 + h, actuator_limit: 1.0 };
            let n = step(&s, &[0.4, -0.2], &p, 0.05).unwrap();
            let d = (n.vel[0] - base.vel[0]).abs() + (n.vel[1] - base.vel[1]).abs();
            assert!(d <= 0.2 * h, "{h}: {d}");
        }
    }

    #[test]
    fn zero_policy_never_reaches_goal() {
        let p = LinearGaussianPolicy::zeros(2, 4, -10.0);
        let r = rollout(&p, &source(), &ToyConfig::default(), 1, true).unwrap();
        assert!(!r.success);
        assert_eq!(r.ret, 0.0);
    }

    #[test]
    fn pd_expert_solves_source() {
        let expert = ToyTrainer::expert(2.0, 1.0, -2.0);
        let cfg = ToyConfig::default();
        let wins = (0..100)
            .filter(|&s| rollout(&expert, &source(), &cfg, s, true).unwrap().success)
            .count();
        assert!(wins >= 95, "{wins}");
    }

    #[test]
    fn rollouts_are_deterministic() {
        let expert = ToyTrainer::expert(2.0, 1.0, -1.0);
        let cfg = ToyConfig::default();
        let a = rollout(&expert, &source(), &cfg, 9, true).unwrap();
        let b = rollout(&expert, &source(), &cfg, 9, true).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.record, b.record);
    }

    #[test]
    fn trainer_requires_all_keys() {
        let space = EvolutionSpace::new(vec!["mass".into()], vec![1.0], vec![2.0]).unwrap();
        assert!(ToyTrainer::new(space, ToyConfig::default()).is_err());
    }
}
