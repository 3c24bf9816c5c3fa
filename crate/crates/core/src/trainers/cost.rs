use super::{Cost, Evaluation, Probe, Result, Trainer, Window};
use crate::geometry::Point;

/// Charges a fixed cost per training iteration and always succeeds, so
/// total cost is proportional to the number of phases walked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostModelTrainer {
    pub episodes_per_step: u64,
}

impl Default for CostModelTrainer {
    fn default() -> Self {
        CostModelTrainer { episodes_per_step: 10 }
    }
}

impl Trainer for CostModelTrainer {
    type Policy = ();

    fn evaluate(&self, _: &(), _: &Point, _: usize, _: u64) -> Result<Evaluation> {
        Ok(Evaluation {
            success_rate: 1.0,
            episodes: 0,
        })
    }

    fn train_step(&self, _: &mut (), _: &Window, _: u64) -> Result<Cost> {
        Ok(Cost::new(1, self.episodes_per_step))
    }

    fn gradient_probe(&self, _: &(), _: &Point, _: u64) -> Result<Probe> {
        Ok(Probe { value: 0.0, episodes: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_cost_per_step() {
        let t = CostModelTrainer::default();
        let w = Window::new(Point::from([0.0]), Point::from([0.1]));
        let total: Cost = (0..7).map(|s| t.train_step(&mut (), &w, s).unwrap()).sum();
        assert_eq!(total, Cost::new(7, 70));
        assert_eq!(t.evaluate(&(), &Point::from([0.3]), 30, 1).unwrap().success_rate, 1.0);
    }
}
