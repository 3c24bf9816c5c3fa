use super::{
    estimate_reward_gradient, evolution_step, finish_train, phase_train, Branch, Method, Outcome, Result,
    TargetPath, TransferConfig, TransferError, TransferReport, SCHEMA_VERSION,
};
use crate::evotree::{clamp_meta, evolution_tree_with, EvolutionTreeOptions};
use crate::geometry::{check_points, dist, geometric_median, Norm, Point};
use crate::trainers::{child_seed, Cost, Trainer};

/// Below this distance `alpha` counts as sitting on its meta robot.
const ARRIVAL_TOLERANCE: f64 = 1e-12;

/// A finished run: the report plus the policy obtained for each target
/// (`None` where the budget ran out).
#[derive(Clone, Debug)]
pub struct TransferRun<P> {
    pub report: TransferReport,
    pub policies: Vec<Option<P>>,
}

/// How a branch picks where to walk next.
#[derive(Clone, Debug)]
enum Plan {
    /// Re-plan from the evolution tree over the branch's targets.
    Tree,
    /// Walk to a fixed point, then split into one branch per target, each
    /// walking straight to its target.
    Via(Point),
}

enum Next {
    Walk(Point),
    Split(Vec<Vec<usize>>),
    Arrived,
}

struct Engine<'a, T: Trainer> {
    trainer: &'a T,
    cfg: &'a TransferConfig,
    targets: &'a [Point],
    branches: Vec<Branch>,
    policies: Vec<Option<T::Policy>>,
}

/// Transfers `expert` from `source` to every target along a shared
/// evolution tree, re-planning the meta robot as it walks and splitting the
/// policy whenever the tree branches.
pub fn meta_evolve<T: Trainer>(
    source: &Point,
    targets: &[Point],
    expert: &T::Policy,
    trainer: &T,
    cfg: &TransferConfig,
) -> Result<TransferRun<T::Policy>> {
    let mut e = Engine::new(source, targets, expert, trainer, cfg)?;
    let all: Vec<usize> = (0..targets.len()).collect();
    e.run_branch(None, source.clone(), all, expert.clone(), child_seed(cfg.seed, 0), Plan::Tree)?;
    Ok(e.finish(Method::Meta, source))
}

/// Independent one-to-one transfers from `source` to each target.
pub fn herd_baseline<T: Trainer>(
    source: &Point,
    targets: &[Point],
    expert: &T::Policy,
    trainer: &T,
    cfg: &TransferConfig,
) -> Result<TransferRun<T::Policy>> {
    let mut e = Engine::new(source, targets, expert, trainer, cfg)?;
    for i in 0..targets.len() {
        e.run_branch(None, source.clone(), vec![i], expert.clone(), child_seed(cfg.seed, i as u64), Plan::Tree)?;
    }
    Ok(e.finish(Method::Herd, source))
}

/// A single meta robot at the geometric median of the source and targets:
/// one shared walk to the median, then independent walks to each target.
pub fn geom_median_baseline<T: Trainer>(
    source: &Point,
    targets: &[Point],
    expert: &T::Policy,
    trainer: &T,
    cfg: &TransferConfig,
) -> Result<TransferRun<T::Policy>> {
    let mut e = Engine::new(source, targets, expert, trainer, cfg)?;
    let mut pts = vec![source.clone()];
    pts.extend(targets.iter().cloned());
    let median = geometric_median(&pts, cfg.p_norm)?;
    let all: Vec<usize> = (0..targets.len()).collect();
    e.run_branch(None, source.clone(), all, expert.clone(), child_seed(cfg.seed, 0), Plan::Via(median))?;
    Ok(e.finish(Method::GeomMedian, source))
}

/// Runs `method` from `source` to `targets`.
pub fn run_method<T: Trainer>(
    method: Method,
    source: &Point,
    targets: &[Point],
    expert: &T::Policy,
    trainer: &T,
    cfg: &TransferConfig,
) -> Result<TransferRun<T::Policy>> {
    match method {
        Method::Meta => meta_evolve(source, targets, expert, trainer, cfg),
        Method::Herd => herd_baseline(source, targets, expert, trainer, cfg),
        Method::GeomMedian => geom_median_baseline(source, targets, expert, trainer, cfg),
    }
}

impl<'a, T: Trainer> Engine<'a, T> {
    fn new(
        source: &Point,
        targets: &'a [Point],
        expert: &T::Policy,
        trainer: &'a T,
        cfg: &'a TransferConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if targets.is_empty() {
            return Err(TransferError::Config("no targets".into()));
        }
        let mut all = vec![source.clone()];
        all.extend(targets.iter().cloned());
        check_points(&all)?;
        if let Some(p) = all.iter().find(|p| !p.in_unit_cube()) {
            return Err(TransferError::Config(format!("{p} lies outside [0,1]^D")));
        }
        let eval = trainer
            .evaluate(expert, source, cfg.eval_episodes, child_seed(cfg.seed, u64::MAX))
            .map_err(|e| TransferError::Trainer {
                context: "expert evaluation".into(),
                source: e,
            })?;
        if eval.success_rate < cfg.success_threshold {
            return Err(TransferError::ExpertBelowThreshold {
                success: eval.success_rate,
                threshold: cfg.success_threshold,
            });
        }
        Ok(Engine {
            trainer,
            cfg,
            targets,
            branches: Vec::new(),
            policies: vec![None; targets.len()],
        })
    }

    fn finish(self, method: Method, source: &Point) -> TransferRun<T::Policy> {
        let mut paths: Vec<TargetPath> = (0..self.targets.len())
            .map(|t| TargetPath {
                target: t,
                branches: Vec::new(),
                outcome: Outcome::Success,
                final_success_rate: None,
            })
            .collect();
        for b in &self.branches {
            for &t in &b.targets {
                paths[t].branches.push(b.id);
                if b.outcome == Outcome::BudgetExhausted {
                    paths[t].outcome = Outcome::BudgetExhausted;
                }
                if let Some(f) = &b.finish {
                    paths[t].final_success_rate = Some(f.final_success_rate);
                }
            }
        }
        let totals: Cost = self.branches.iter().map(Branch::cost).sum();
        let outcome = if paths.iter().all(|p| p.outcome == Outcome::Success) {
            Outcome::Success
        } else {
            Outcome::BudgetExhausted
        };
        TransferRun {
            report: TransferReport {
                schema: SCHEMA_VERSION,
                method,
                config: self.cfg.clone(),
                keys: Vec::new(),
                source: source.clone(),
                targets: self.targets.to_vec(),
                branches: self.branches,
                paths,
                totals,
                outcome,
            },
            policies: self.policies,
        }
    }

    /// Where the branch serving `subset` goes from `alpha`.
    fn next(&self, alpha: &Point, subset: &[usize], plan: &Plan) -> Result<Next> {
        let cfg = self.cfg;
        let p = cfg.p_norm;
        if let Plan::Via(point) = plan {
            if dist(alpha, point, p) <= ARRIVAL_TOLERANCE {
                return Ok(Next::Split(subset.iter().map(|&t| vec![t]).collect()));
            }
            return Ok(Next::Walk(point.clone()));
        }
        if let [t] = subset {
            let target = &self.targets[*t];
            return Ok(if dist(alpha, target, p) <= ARRIVAL_TOLERANCE {
                Next::Arrived
            } else {
                Next::Walk(target.clone())
            });
        }
        let pts: Vec<Point> = subset.iter().map(|&t| self.targets[t].clone()).collect();
        if p == Norm::L1 {
            // Cheap exact trunk direction while far from the next branch point.
            let c = clamp_meta(alpha, &pts)?;
            if dist(alpha, &c, p) >= cfg.xi {
                return Ok(Next::Walk(c));
            }
        }
        let opts = EvolutionTreeOptions {
            reach_radius: cfg.xi,
            ..Default::default()
        };
        let r = evolution_tree_with(alpha, &pts, p, &opts)?;
        if r.is_split() {
            let parts = r
                .partition
                .iter()
                .map(|g| g.iter().map(|&i| subset[i]).collect())
                .collect();
            return Ok(Next::Split(parts));
        }
        if dist(alpha, &r.beta_meta, p) <= ARRIVAL_TOLERANCE {
            // Everything left sits on alpha.
            return Ok(Next::Split(subset.iter().map(|&t| vec![t]).collect()));
        }
        Ok(Next::Walk(r.beta_meta))
    }

    fn run_branch(
        &mut self,
        parent: Option<usize>,
        start: Point,
        subset: Vec<usize>,
        mut policy: T::Policy,
        seed: u64,
        plan: Plan,
    ) -> Result<()> {
        let id = self.branches.len();
        self.branches.push(Branch {
            id,
            parent,
            targets: subset.clone(),
            start: start.clone(),
            end: start.clone(),
            phases: Vec::new(),
            finish: None,
            outcome: Outcome::Success,
        });
        let cfg = self.cfg;
        let mut alpha = start;
        let mut k: u64 = 0;
        loop {
            let meta = match self.next(&alpha, &subset, &plan)? {
                Next::Walk(m) => m,
                Next::Arrived => {
                    let t = subset[0];
                    let f = finish_train(self.trainer, &mut policy, &alpha, cfg, child_seed(seed, u64::MAX))?;
                    let b = &mut self.branches[id];
                    b.finish = Some(f.record);
                    if f.passed {
                        self.policies[t] = Some(policy);
                    } else {
                        b.outcome = Outcome::BudgetExhausted;
                    }
                    return Ok(());
                }
                Next::Split(parts) => {
                    // Children always re-plan from their own targets.
                    for (i, part) in parts.into_iter().enumerate() {
                        let s = child_seed(seed, (1 << 32) + i as u64);
                        self.run_branch(Some(id), alpha.clone(), part, policy.clone(), s, Plan::Tree)?;
                    }
                    return Ok(());
                }
            };
            if self.branches[id].phases.len() >= cfg.max_phases {
                self.branches[id].outcome = Outcome::BudgetExhausted;
                return Ok(());
            }
            let phase_seed = child_seed(seed, k);
            k += 1;
            let d = dist(&alpha, &meta, cfg.p_norm);
            let (to, grad_cost) = if d < cfg.xi {
                (meta, Cost::default())
            } else {
                let (grad, cost) =
                    estimate_reward_gradient(self.trainer, &policy, &alpha, cfg, child_seed(phase_seed, 1 << 40))?;
                let attract = |alpha: &Point| evolution_step(alpha, &meta, &vec![0.0; alpha.dim()], cfg);
                let l = match evolution_step(&alpha, &meta, &grad, cfg) {
                    Err(TransferError::DegenerateDirection) => attract(&alpha)?,
                    r => r?,
                };
                let mut to = alpha.offset(&l, 1.0);
                // The attraction shrinks with the distance while the reward
                // gradient does not, so close to the meta robot the gradient
                // can stall the walk; such steps fall back to pure attraction.
                if dist(&to, &meta, cfg.p_norm) > d - 0.5 * cfg.xi {
                    to = alpha.offset(&attract(&alpha)?, 1.0);
                }
                (to, cost)
            };
            let mut o = phase_train(self.trainer, &mut policy, &alpha, &to, cfg, phase_seed)?;
            o.record.sim_episodes += grad_cost.sim_episodes;
            o.record.train_iterations += grad_cost.train_iterations;
            let b = &mut self.branches[id];
            b.phases.push(o.record);
            b.end = to.clone();
            alpha = to;
            if !o.passed {
                b.outcome = Outcome::BudgetExhausted;
                return Ok(());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainers::CostModelTrainer;

    fn cfg(xi: f64) -> TransferConfig {
        TransferConfig {
            xi,
            gradient_samples: 0,
            ..Default::default()
        }
    }

    fn pts(v: &[[f64; 2]]) -> Vec<Point> {
        v.iter().map(|p| Point::from(*p)).collect()
    }

    fn speedup(source: [f64; 2], targets: &[[f64; 2]], c: &TransferConfig) -> f64 {
        let t = CostModelTrainer::default();
        let s = Point::from(source);
        let ts = pts(targets);
        let meta = meta_evolve(&s, &ts, &(), &t, c).unwrap().report;
        let herd = herd_baseline(&s, &ts, &(), &t, c).unwrap().report;
        meta.validate().unwrap();
        herd.validate().unwrap();
        herd.totals.sim_episodes as f64 / meta.totals.sim_episodes as f64
    }

    #[test]
    fn two_near_targets_share_the_trunk() {
        let s = speedup([0.0, 0.5], &[[1.0, 0.55], [1.0, 0.45]], &cfg(0.01));
        assert!((s - 210.0 / 110.0).abs() < 0.05, "{s}");
    }

    #[test]
    fn opposite_targets_gain_nothing() {
        let s = speedup([0.5, 0.5], &[[0.0, 0.5], [1.0, 0.5]], &cfg(0.01));
        assert!((s - 1.0).abs() < 0.05, "{s}");
    }

    #[test]
    fn single_target_equals_herd() {
        let t = CostModelTrainer::default();
        let s = Point::from([0.1, 0.2]);
        let ts = pts(&[[0.8, 0.6]]);
        let c = cfg(0.03);
        let a = meta_evolve(&s, &ts, &(), &t, &c).unwrap().report;
        let b = herd_baseline(&s, &ts, &(), &t, &c).unwrap().report;
        assert_eq!(a.branches, b.branches);
        assert_eq!(a.totals, b.totals);
    }

    #[test]
    fn phase_count_follows_edge_length() {
        let t = CostModelTrainer::default();
        let r = meta_evolve(&Point::from([0.0, 0.0]), &pts(&[[0.3, 0.4]]), &(), &t, &cfg(0.01))
            .unwrap()
            .report;
        // L1 length 0.7.
        assert!((r.phase_count() as i64 - 70).abs() <= 1, "{}", r.phase_count());
        assert_eq!(r.totals.sim_episodes, 10 * r.phase_count() as u64);
    }

    #[test]
    fn geom_median_walks_through_the_median() {
        let t = CostModelTrainer::default();
        let c = TransferConfig { p_norm: Norm::L2, ..cfg(0.01) };
        let r = geom_median_baseline(&Point::from([0.0, 0.5]), &pts(&[[1.0, 0.55], [1.0, 0.45]]), &(), &t, &c)
            .unwrap()
            .report;
        r.validate().unwrap();
        assert_eq!(r.branches.len(), 3);
        assert_eq!(r.branches[1].start, r.branches[0].end);
        assert_eq!(r.paths[0].branches, vec![0, 1]);
    }

    #[test]
    fn expert_below_threshold_is_rejected() {
        struct Failing;
        impl Trainer for Failing {
            type Policy = ();
            fn evaluate(&self, _: &(), _: &Point, e: usize, _: u64) -> crate::trainers::Result<crate::trainers::Evaluation> {
                Ok(crate::trainers::Evaluation { success_rate: 0.1, episodes: e as u64 })
            }
            fn train_step(&self, _: &mut (), _: &crate::trainers::Window, _: u64) -> crate::trainers::Result<Cost> {
                Ok(Cost::new(1, 1))
            }
            fn gradient_probe(&self, _: &(), _: &Point, _: u64) -> crate::trainers::Result<crate::trainers::Probe> {
                Ok(crate::trainers::Probe { value: 0.0, episodes: 0 })
            }
        }
        let r = meta_evolve(&Point::from([0.0]), &[Point::from([1.0])], &(), &Failing, &cfg(0.1));
        assert!(matches!(r, Err(TransferError::ExpertBelowThreshold { .. })));
    }

    #[test]
    fn out_of_cube_points_are_rejected() {
        let t = CostModelTrainer::default();
        let r = meta_evolve(&Point::from([0.0, 0.0]), &pts(&[[1.5, 0.0]]), &(), &t, &cfg(0.1));
        assert!(matches!(r, Err(TransferError::Config(_))));
    }
}
