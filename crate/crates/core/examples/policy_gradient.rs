//! Policy-gradient fine-tuning of the toy controller on a robot it fails on.

use meta_evolve::geometry::Point;
use meta_evolve::robot::EvolutionSpace;
use meta_evolve::trainers::{toy::PARAM_KEYS, ToyConfig, ToyTrainer, Trainer, Window};

pub fn main() {
    let space = EvolutionSpace::new(
        PARAM_KEYS.iter().map(|k| k.to_string()).collect(),
        vec![1.0, 0.1, 0.4, 1.0, 3.0],
        vec![1.0, 1.0, 1.0, 1.0, 3.0],
    )
    .unwrap();
    let trainer = ToyTrainer::new(space, ToyConfig::default()).unwrap();
    // Weak x actuator: the PD gains that work on the source are too soft.
    let weak = Point::from([0.0, 0.15, 1.0, 0.0, 0.0]);
    let mut policy = ToyTrainer::expert(1.0, 1.0, -1.5);
    let window = Window::new(weak.clone(), weak.clone());
    for it in 0..=300 {
        if it % 50 == 0 {
            let e = trainer.evaluate(&policy, &weak, 50, 99).unwrap();
            println!("iteration {it:>3}: success {:.2}, weights {:.2?}", e.success_rate, policy.weights);
        }
        trainer.train_step(&mut policy, &window, it).unwrap();
    }
}
