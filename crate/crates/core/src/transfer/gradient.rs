use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Result, TransferConfig, TransferError};
use crate::geometry::{Norm, Point};
use crate::trainers::{Cost, Trainer};

/// Least-squares reward gradient at `alpha`.
///
/// Draws `cfg.gradient_samples` perturbations uniformly on the L2 sphere of
/// radius `xi / 2` (clipped to the unit cube), probes the trainer at each with
/// the same seed as the unperturbed probe, and fits `Δreturn ≈ g · Δalpha`.
pub fn estimate_reward_gradient<T: Trainer>(
    trainer: &T,
    policy: &T::Policy,
    alpha: &Point,
    cfg: &TransferConfig,
    seed: u64,
) -> Result<(Vec<f64>, Cost)> {
    let dim = alpha.dim();
    let n = cfg.gradient_samples;
    if n == 0 {
        return Ok((vec![0.0; dim], Cost::default()));
    }
    if n < dim + 1 {
        return Err(TransferError::Config(format!(
            "gradient_samples must be 0 or at least D + 1 = {}",
            dim + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe_seed: u64 = rng.random();
    let probe = |a: &Point, index: Option<usize>| {
        trainer.gradient_probe(policy, a, probe_seed).map_err(|e| TransferError::Trainer {
            context: match index {
                Some(i) => format!("gradient perturbation {i}"),
                None => "gradient baseline".into(),
            },
            source: e,
        })
    };
    let base = probe(alpha, None)?;
    let mut cost = Cost::episodes(base.episodes);
    let mut x = DMatrix::<f64>::zeros(n, dim);
    let mut y = DVector::<f64>::zeros(n);
    for k in 0..n {
        let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let len = Norm::L2.of(&u).max(f64::MIN_POSITIVE);
        u.iter_mut().for_each(|v| *v *= 0.5 * cfg.xi / len);
        let p = Point::new(
            alpha
                .iter()
                .zip(&u)
                .map(|(a, d)| (a + d).clamp(0.0, 1.0))
                .collect(),
        );
        let r = probe(&p, Some(k))?;
        cost += Cost::episodes(r.episodes);
        for d in 0..dim {
            x[(k, d)] = p[d] - alpha[d];
        }
        y[k] = r.value - base.value;
    }
    let g = x
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| TransferError::Config(format!("gradient fit failed: {e}")))?;
    Ok((g.iter().copied().collect(), cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainers::{CostModelTrainer, Evaluation, Probe, TrainerError, Window};

    /// Trainer whose probe is a known linear function of alpha.
    struct Linear(Vec<f64>);

    impl Trainer for Linear {
        type Policy = ();
        fn evaluate(&self, _: &(), _: &Point, _: usize, _: u64) -> crate::trainers::Result<Evaluation> {
            unreachable!()
        }
        fn train_step(&self, _: &mut (), _: &Window, _: u64) -> crate::trainers::Result<Cost> {
            unreachable!()
        }
        fn gradient_probe(&self, _: &(), a: &Point, _: u64) -> crate::trainers::Result<Probe> {
            if a[0] > 0.95 {
                return Err(TrainerError::Simulation("boom".into()));
            }
            Ok(Probe {
                value: a.iter().zip(&self.0).map(|(x, w)| x * w).sum(),
                episodes: 2,
            })
        }
    }

    #[test]
    fn recovers_linear_gradient() {
        let t = Linear(vec![0.5, -2.0, 1.0]);
        let cfg = TransferConfig { gradient_samples: 8, ..Default::default() };
        let (g, cost) = estimate_reward_gradient(&t, &(), &Point::from([0.3, 0.4, 0.5]), &cfg, 7).unwrap();
        for (a, b) in g.iter().zip(&t.0) {
            assert!((a - b).abs() < 1e-9, "{g:?}");
        }
        assert_eq!(cost.sim_episodes, 18);
    }

    #[test]
    fn disabled_and_constant() {
        let cfg = TransferConfig { gradient_samples: 0, ..Default::default() };
        let (g, _) = estimate_reward_gradient(&CostModelTrainer::default(), &(), &Point::from([0.2, 0.2]), &cfg, 1).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        let cfg = TransferConfig { gradient_samples: 12, ..Default::default() };
        let (g, _) = estimate_reward_gradient(&CostModelTrainer::default(), &(), &Point::from([0.2, 0.2]), &cfg, 1).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn too_few_samples_is_a_config_error() {
        let cfg = TransferConfig { gradient_samples: 3, ..Default::default() };
        let r = estimate_reward_gradient(&CostModelTrainer::default(), &(), &Point::from([0.2, 0.2, 0.2]), &cfg, 1);
        assert!(matches!(r, Err(TransferError::Config(_))));
    }

    #[test]
    fn probe_failures_name_the_perturbation() {
        let t = Linear(vec![1.0]);
        let cfg = TransferConfig { gradient_samples: 4, xi: 0.2, ..Default::default() };
        let err = estimate_reward_gradient(&t, &(), &Point::from([0.9]), &cfg, 3).unwrap_err().to_string();
        assert!(err.contains("gradient perturbation"), "{err}");
    }
}
