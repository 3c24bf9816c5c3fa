use super::{Result, TransferConfig, TransferError};
use crate::geometry::{Norm, Point};

/// First-order maximizer of `<grad, l> - (lambda/2) pen(beta_meta - (alpha + l))`
/// over steps of length `xi`, clipped so `alpha + l` stays in `[0,1]^D`.
///
/// With the squared-L2 penalty the direction is
/// `grad + lambda (beta_meta - alpha)`; with the squared-L1 penalty the
/// attraction becomes `lambda |beta_meta - alpha|_1 sign(beta_meta - alpha)`.
/// The step length is measured in `cfg.p_norm`, so that walking an edge costs
/// phases in proportion to its length in the tree's norm.
pub fn evolution_step(alpha: &Point, beta_meta: &Point, grad: &[f64], cfg: &TransferConfig) -> Result<Vec<f64>> {
    let dim = alpha.dim();
    if beta_meta.dim() != dim || grad.len() != dim {
        return Err(TransferError::Config("dimension mismatch in evolution step".into()));
    }
    let diff = beta_meta.sub(alpha);
    let attraction: Vec<f64> = match cfg.penalty_norm {
        Norm::L2 => diff.clone(),
        Norm::L1 => {
            let n = Norm::L1.of(&diff);
            diff.iter().map(|d| n * d.signum() * (*d != 0.0) as u8 as f64).collect()
        }
    };
    let g: Vec<f64> = grad
        .iter()
        .zip(&attraction)
        .map(|(g, a)| g + cfg.lambda * a)
        .collect();
    let norm = cfg.p_norm.of(&g);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(TransferError::DegenerateDirection);
    }
    Ok(g.iter()
        .zip(alpha.iter())
        .map(|(gi, a)| (a + cfg.xi * gi / norm).clamp(0.0, 1.0) - a)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: Norm) -> TransferConfig {
        TransferConfig {
            p_norm: p,
            ..Default::default()
        }
    }

    #[test]
    fn pure_attraction() {
        let l = evolution_step(&Point::from([0.0, 0.0]), &Point::from([1.0, 0.0]), &[0.0, 0.0], &cfg(Norm::L2)).unwrap();
        assert_eq!(l, vec![0.03, 0.0]);
    }

    #[test]
    fn gradient_tilts_the_step() {
        let l = evolution_step(&Point::from([0.0, 0.0]), &Point::from([1.0, 0.0]), &[0.0, 1.0], &cfg(Norm::L2)).unwrap();
        let e = 0.03 / 2f64.sqrt();
        assert!((l[0] - e).abs() < 1e-15 && (l[1] - e).abs() < 1e-15);
        // Same direction, unit L1 length.
        let l = evolution_step(&Point::from([0.0, 0.0]), &Point::from([1.0, 0.0]), &[0.0, 1.0], &cfg(Norm::L1)).unwrap();
        assert!((l[0] - 0.015).abs() < 1e-15 && (l[1] - 0.015).abs() < 1e-15);
    }

    #[test]
    fn stays_in_the_unit_cube() {
        let a = Point::from([0.99, 0.005]);
        let l = evolution_step(&a, &Point::from([1.0, 0.0]), &[5.0, -5.0], &cfg(Norm::L2)).unwrap();
        let next = a.offset(&l, 1.0);
        assert!(next.in_unit_cube());
        assert_eq!(next[0], 1.0);
        assert_eq!(next[1], 0.0);
    }

    #[test]
    fn zero_direction_is_degenerate() {
        let a = Point::from([0.5, 0.5]);
        let r = evolution_step(&a, &Point::from([0.75, 0.5]), &[-0.25, 0.0], &cfg(Norm::L2));
        assert!(matches!(r, Err(TransferError::DegenerateDirection)));
    }

    #[test]
    fn l1_penalty_pulls_along_the_sign() {
        let c = TransferConfig { penalty_norm: Norm::L1, ..cfg(Norm::L1) };
        let l = evolution_step(&Point::from([0.5, 0.5]), &Point::from([0.8, 0.4]), &[0.0, 0.0], &c).unwrap();
        assert!((l[0] - 0.015).abs() < 1e-15 && (l[1] + 0.015).abs() < 1e-15);
    }
}
