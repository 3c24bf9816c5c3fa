use std::path::Path;

use meta_evolve::robot::{match_kinematics, EvolutionSpace, RobotSpec};
use meta_evolve::trainers::{child_seed, ToyConfig, ToyTrainer, Trainer, Window};

/// Policy gradient on one fixed robot, starting from the source expert on a
/// robot just past where it stops succeeding, recovers a reliable policy.
#[test]
fn training_on_a_fixed_robot_reaches_eighty_percent() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy");
    let specs: Vec<RobotSpec> = ["source", "sluggish"]
        .iter()
        .map(|n| RobotSpec::load(dir.join(format!("{n}.json"))).unwrap())
        .collect();
    let matched = match_kinematics(&specs).unwrap();
    let space = EvolutionSpace::from_matched(&matched).unwrap();
    let alphas = space.robot_alphas(&matched).unwrap();
    let trainer = ToyTrainer::new(space, ToyConfig::default()).unwrap();
    let alpha = alphas[0].lerp(&alphas[1], 0.99);
    let window = Window::new(alpha.clone(), alpha.clone());
    let expert = ToyTrainer::expert(2.0, 1.0, -2.0);
    let start = trainer.evaluate(&expert, &alpha, 100, 99).unwrap().success_rate;
    assert!(start < 0.5, "the expert already solves this robot ({start})");

    let mut reached = 0;
    for seed in 0..5u64 {
        let mut policy = expert.clone();
        for it in 1..=500u64 {
            trainer.train_step(&mut policy, &window, child_seed(seed, it)).unwrap();
            if it % 10 == 0 && trainer.evaluate(&policy, &alpha, 100, 99).unwrap().success_rate >= 0.8 {
                reached += 1;
                break;
            }
        }
    }
    assert!(reached >= 4, "{reached}/5 seeds reached 0.8");
}
