use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Result, TrainerError};

const LOG_STD_MIN: f64 = -4.6;
const LOG_STD_MAX: f64 = 0.7;

/// `a ~ N(W phi, diag(exp(log_std))^2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearGaussianPolicy {
    pub act_dim: usize,
    pub feat_dim: usize,
    /// Row-major `act_dim x feat_dim`.
    pub weights: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl LinearGaussianPolicy {
    pub fn zeros(act_dim: usize, feat_dim: usize, log_std: f64) -> Self {
        LinearGaussianPolicy {
            act_dim,
            feat_dim,
            weights: vec![0.0; act_dim * feat_dim],
            log_std: vec![log_std; act_dim],
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.log_std.len()
    }

    pub fn params(&self) -> Vec<f64> {
        self.weights.iter().chain(&self.log_std).copied().collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let n = self.weights.len();
        self.weights.copy_from_slice(&p[..n]);
        self.log_std.copy_from_slice(&p[n..]);
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    pub fn mean(&self, phi: &[f64]) -> Vec<f64> {
        (0..self.act_dim)
            .map(|i| {
                let row = &self.weights[i * self.feat_dim..(i + 1) * self.feat_dim];
                row.iter().zip(phi).map(|(w, x)| w * x).sum()
            })
            .collect()
    }

    pub fn sample(&self, phi: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        self.mean(phi)
            .into_iter()
            .zip(&self.log_std)
            .map(|(m, ls)| m + ls.exp() * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    pub fn log_prob(&self, phi: &[f64], a: &[f64]) -> f64 {
        let mu = self.mean(phi);
        (0..self.act_dim)
            .map(|i| {
                let s = self.log_std[i].exp();
                let z = (a[i] - mu[i]) / s;
                -0.5 * z * z - self.log_std[i] - 0.5 * (2.0 * std::f64::consts::PI).ln()
            })
            .sum()
    }

    /// Gradient of `log_prob` with respect to `params()`, accumulated into
    /// `out` with weight `w`.
    pub fn add_grad_log_prob(&self, phi: &[f64], a: &[f64], w: f64, out: &mut [f64]) {
        let mu = self.mean(phi);
        let n = self.weights.len();
        for i in 0..self.act_dim {
            let var = (2.0 * self.log_std[i]).exp();
            let d = a[i] - mu[i];
            for j in 0..self.feat_dim {
                out[i * self.feat_dim + j] += w * d / var * phi[j];
            }
            out[n + i] += w * (d * d / var - 1.0);
        }
    }
}

/// Features and actions of one episode plus its return.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeRecord {
    pub features: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub ret: f64,
}

/// REINFORCE with a mean-return baseline. Each episode's score function is
/// averaged over its steps so the scale does not grow with the horizon.
pub fn policy_gradient(policy: &LinearGaussianPolicy, batch: &[EpisodeRecord]) -> Vec<f64> {
    let mut g = vec![0.0; policy.param_count()];
    if batch.is_empty() {
        return g;
    }
    let baseline = batch.iter().map(|e| e.ret).sum::<f64>() / batch.len() as f64;
    for e in batch {
        let adv = e.ret - baseline;
        if adv == 0.0 || e.features.is_empty() {
            continue;
        }
        let w = adv / (batch.len() * e.features.len()) as f64;
        for (phi, a) in e.features.iter().zip(&e.actions) {
            policy.add_grad_log_prob(phi, a, w, &mut g);
        }
    }
    g
}

/// One gradient-ascent update.
pub fn pg_train_step(
    policy: &LinearGaussianPolicy,
    batch: &[EpisodeRecord],
    step_size: f64,
) -> Result<LinearGaussianPolicy> {
    if batch.is_empty() {
        return Err(TrainerError::InvalidInput("empty batch".into()));
    }
    let g = policy_gradient(policy, batch);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(TrainerError::Divergence("non-finite policy gradient".into()));
    }
    let mut p = policy.params();
    for (x, d) in p.iter_mut().zip(&g) {
        *x += step_size * d;
    }
    let mut next = policy.clone();
    next.set_params(&p);
    for ls in &mut next.log_std {
        *ls = ls.clamp(LOG_STD_MIN, LOG_STD_MAX);
    }
    if !next.is_finite() {
        return Err(TrainerError::Divergence("non-finite policy parameters".into()));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bandit_batch(policy: &LinearGaussianPolicy, n: usize, seed: u64) -> Vec<EpisodeRecord> {
        let target = [0.7, -0.3];
        let phi = vec![1.0, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let a = policy.sample(&phi, &mut rng);
                let ret = -((a[0] - target[0]).powi(2) + (a[1] - target[1]).powi(2));
                EpisodeRecord {
                    features: vec![phi.clone()],
                    actions: vec![a],
                    ret,
                }
            })
            .collect()
    }

    fn policy() -> LinearGaussianPolicy {
        LinearGaussianPolicy {
            act_dim: 2,
            feat_dim: 2,
            weights: vec![0.1, -0.2, 0.3, 0.05],
            log_std: vec![-1.0, -0.5],
        }
    }

    #[test]
    fn zero_returns_leave_policy_unchanged() {
        let p = policy();
        let mut batch = bandit_batch(&p, 12, 3);
        for e in &mut batch {
            e.ret = 0.0;
        }
        assert_eq!(pg_train_step(&p, &batch, 0.05).unwrap(), p);
    }

    #[test]
    fn log_prob_gradient_matches_finite_differences() {
        let p = policy();
        let phi = [0.4, -1.3];
        let a = [0.2, 0.9];
        let mut g = vec![0.0; p.param_count()];
        p.add_grad_log_prob(&phi, &a, 1.0, &mut g);
        let base = p.params();
        for k in 0..base.len() {
            let h = 1e-6;
            let mut q = p.clone();
            let mut v = base.clone();
            v[k] += h;
            q.set_params(&v);
            let up = q.log_prob(&phi, &a);
            v[k] -= 2.0 * h;
            q.set_params(&v);
            let down = q.log_prob(&phi, &a);
            let fd = (up - down) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-6 * fd.abs().max(1.0), "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn bandit_estimator_is_unbiased() {
        // E[r] = -|mu - t|^2 - sum sigma^2, so dE/dmu = -2 (mu - t).
        let p = policy();
        let phi = [1.0, 0.5];
        let mu = p.mean(&phi);
        let target = [0.7, -0.3];
        let n = 10_000;
        let batch = bandit_batch(&p, n, 11);
        // Per-sample estimates for a standard error.
        let mut samples = Vec::with_capacity(n);
        for e in &batch {
            let mut g = vec![0.0; p.param_count()];
            p.add_grad_log_prob(&e.features[0], &e.actions[0], e.ret, &mut g);
            samples.push(g);
        }
        for i in 0..2 {
            for j in 0..2 {
                let k = i * 2 + j;
                let exact = -2.0 * (mu[i] - target[i]) * phi[j];
                let m = samples.iter().map(|g| g[k]).sum::<f64>() / n as f64;
                let var = samples.iter().map(|g| (g[k] - m).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                assert!((m - exact).abs() <= 3.0 * se, "w{k}: {m} vs {exact} (se {se})");
            }
        }
        for i in 0..2 {
            let exact = -2.0 * (2.0 * p.log_std[i]).exp();
            let m = samples.iter().map(|g| g[4 + i]).sum::<f64>() / n as f64;
            let var = samples.iter().map(|g| (g[4 + i] - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((m - exact).abs() <= 3.0 * (var / n as f64).sqrt(), "log_std{i}: {m} vs {exact}");
        }
    }

    #[test]
    fn update_moves_toward_higher_return() {
        let mut p = policy();
        let phi = [1.0, 0.5];
        let before = -(p.mean(&phi)[0] - 0.7f64).powi(2);
        for s in 0..200 {
            let batch = bandit_batch(&p, 12, s);
            p = pg_train_step(&p, &batch, 0.05).unwrap();
        }
        let after = -(p.mean(&phi)[0] - 0.7f64).powi(2);
        assert!(after > before);
    }

    #[test]
    fn non_finite_returns_diverge() {
        let p = policy();
        let mut batch = bandit_batch(&p, 4, 1);
        batch[0].ret = f64::NAN;
        assert!(matches!(pg_train_step(&p, &batch, 0.05), Err(TrainerError::Divergence(_))));
    }
}
