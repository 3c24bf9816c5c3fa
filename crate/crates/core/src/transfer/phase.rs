use serde::{Deserialize, Serialize};

use super::{Result, TransferConfig, TransferError};
use crate::geometry::Point;
use crate::trainers::{child_seed, Cost, Trainer, Window};

/// One edge segment walked plus the training spent on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub alpha_from: Point,
    pub alpha_to: Point,
    pub train_iterations: u64,
    pub sim_episodes: u64,
    pub final_success_rate: f64,
}

impl PhaseRecord {
    pub fn cost(&self) -> Cost {
        Cost::new(self.train_iterations, self.sim_episodes)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseOutcome {
    pub record: PhaseRecord,
    /// Whether the success gate was passed within the iteration budget.
    pub passed: bool,
}

/// Sampling window after `t` completed iterations: its start slides from
/// `from` toward `to` by `shrink^t`.
pub fn window_at(from: &Point, to: &Point, shrink: f64, t: usize) -> Window {
    let keep = shrink.powi(t as i32);
    Window::new(to.lerp(from, keep), to.clone())
}

fn trainer_err(context: &str, t: usize) -> impl FnOnce(crate::trainers::TrainerError) -> TransferError + '_ {
    move |e| TransferError::Trainer {
        context: format!("{context}, iteration {t}"),
        source: e,
    }
}

/// Trains on robots drawn from the shrinking window `[from, to]` until the
/// policy's success rate at `to` reaches `cfg.success_threshold`.
pub fn phase_train<T: Trainer>(
    trainer: &T,
    policy: &mut T::Policy,
    from: &Point,
    to: &Point,
    cfg: &TransferConfig,
    seed: u64,
) -> Result<PhaseOutcome> {
    let mut cost = Cost::default();
    let mut success = 0.0;
    for t in 0..cfg.max_phase_iterations {
        let window = window_at(from, to, cfg.shrink_ratio, t);
        cost += trainer
            .train_step(policy, &window, child_seed(seed, 2 * t as u64))
            .map_err(trainer_err("phase training", t))?;
        let eval = trainer
            .evaluate(policy, to, cfg.eval_episodes, child_seed(seed, 2 * t as u64 + 1))
            .map_err(trainer_err("phase evaluation", t))?;
        cost += Cost::episodes(eval.episodes);
        success = eval.success_rate;
        if success >= cfg.success_threshold {
            return Ok(outcome(from, to, cost, success, true));
        }
    }
    Ok(outcome(from, to, cost, success, false))
}

/// Evaluates at `target` and keeps training there until the success rate
/// reaches `cfg.final_success`.
pub fn finish_train<T: Trainer>(
    trainer: &T,
    policy: &mut T::Policy,
    target: &Point,
    cfg: &TransferConfig,
    seed: u64,
) -> Result<PhaseOutcome> {
    let window = Window::new(target.clone(), target.clone());
    let mut cost = Cost::default();
    for t in 0..=cfg.max_phase_iterations {
        if t > 0 {
            cost += trainer
                .train_step(policy, &window, child_seed(seed, 2 * t as u64))
                .map_err(trainer_err("final training", t))?;
        }
        let eval = trainer
            .evaluate(policy, target, cfg.eval_episodes, child_seed(seed, 2 * t as u64 + 1))
            .map_err(trainer_err("final evaluation", t))?;
        cost += Cost::episodes(eval.episodes);
        if eval.success_rate >= cfg.final_success {
            return Ok(outcome(target, target, cost, eval.success_rate, true));
        }
        if t == cfg.max_phase_iterations {
            return Ok(outcome(target, target, cost, eval.success_rate, false));
        }
    }
    unreachable!("loop returns on its last iteration")
}

fn outcome(from: &Point, to: &Point, cost: Cost, success: f64, passed: bool) -> PhaseOutcome {
    PhaseOutcome {
        record: PhaseRecord {
            alpha_from: from.clone(),
            alpha_to: to.clone(),
            train_iterations: cost.train_iterations,
            sim_episodes: cost.sim_episodes,
            final_success_rate: success,
        },
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainers::{CostModelTrainer, Evaluation, Probe};
    use std::cell::RefCell;

    #[test]
    fn cost_model_phase_is_one_iteration() {
        let cfg = TransferConfig::default();
        let o = phase_train(&CostModelTrainer::default(), &mut (), &Point::from([0.0]), &Point::from([0.03]), &cfg, 1).unwrap();
        assert!(o.passed);
        assert_eq!(o.record.cost(), Cost::new(1, 10));
        let f = finish_train(&CostModelTrainer::default(), &mut (), &Point::from([0.03]), &cfg, 1).unwrap();
        assert_eq!(f.record.cost(), Cost::default());
    }

    #[test]
    fn window_shrinks_geometrically() {
        let from = Point::from([0.0, 0.0]);
        let to = Point::from([0.03, 0.0]);
        for t in [0usize, 1, 10, 100] {
            let w = window_at(&from, &to, 0.995, t);
            let len = (w.end[0] - w.start[0]).abs();
            assert!((len - 0.03 * 0.995f64.powi(t as i32)).abs() < 1e-15);
        }
    }

    /// Reports a scripted sequence of success rates and logs windows.
    struct Scripted {
        rates: Vec<f64>,
        calls: RefCell<usize>,
        windows: RefCell<Vec<Window>>,
    }

    impl Trainer for Scripted {
        type Policy = ();
        fn evaluate(&self, _: &(), _: &Point, episodes: usize, _: u64) -> crate::trainers::Result<Evaluation> {
            let mut c = self.calls.borrow_mut();
            let r = self.rates[(*c).min(self.rates.len() - 1)];
            *c += 1;
            Ok(Evaluation { success_rate: r, episodes: episodes as u64 })
        }
        fn train_step(&self, _: &mut (), w: &Window, _: u64) -> crate::trainers::Result<Cost> {
            self.windows.borrow_mut().push(w.clone());
            Ok(Cost::new(1, 12))
        }
        fn gradient_probe(&self, _: &(), _: &Point, _: u64) -> crate::trainers::Result<Probe> {
            Ok(Probe { value: 0.0, episodes: 0 })
        }
    }

    #[test]
    fn gate_holds_below_threshold() {
        let t = Scripted { rates: vec![0.6, 0.6, 0.7], calls: RefCell::new(0), windows: RefCell::new(vec![]) };
        let cfg = TransferConfig::default();
        let o = phase_train(&t, &mut (), &Point::from([0.0]), &Point::from([0.03]), &cfg, 1).unwrap();
        assert!(o.passed);
        assert_eq!(o.record.train_iterations, 3);
        assert_eq!(o.record.sim_episodes, 3 * (12 + 30));
        assert_eq!(o.record.final_success_rate, 0.7);
        let w = t.windows.borrow();
        assert!((w[2].start[0] - 0.03 * (1.0 - 0.995f64.powi(2))).abs() < 1e-15);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let t = Scripted { rates: vec![0.1], calls: RefCell::new(0), windows: RefCell::new(vec![]) };
        let cfg = TransferConfig { max_phase_iterations: 5, ..Default::default() };
        let o = phase_train(&t, &mut (), &Point::from([0.0]), &Point::from([0.03]), &cfg, 1).unwrap();
        assert!(!o.passed);
        assert_eq!(o.record.train_iterations, 5);
    }
}
