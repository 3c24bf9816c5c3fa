//! End-to-end transfer of a point-mass controller to three modified robots.

use std::path::Path;

use meta_evolve::robot::{match_kinematics, EvolutionSpace, RobotSpec};
use meta_evolve::trainers::{ToyConfig, ToyTrainer, Trainer};
use meta_evolve::transfer::{run_method, Method, Preset, TransferConfig};

pub fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy");
    let specs: Vec<RobotSpec> = ["source", "heavy_weak_x", "heavy_weak_xy", "sluggish"]
        .iter()
        .map(|n| RobotSpec::load(dir.join(format!("{n}.json"))).unwrap())
        .collect();
    let matched = match_kinematics(&specs).unwrap();
    let space = EvolutionSpace::from_matched(&matched).unwrap();
    let alphas = space.robot_alphas(&matched).unwrap();
    let trainer = ToyTrainer::new(space, ToyConfig::default()).unwrap();
    let expert = ToyTrainer::expert(2.0, 1.0, -2.0);
    for (name, a) in matched.robots.iter().zip(&alphas) {
        let e = trainer.evaluate(&expert, a, 100, 1).unwrap();
        println!("expert on {name}: {:.2}", e.success_rate);
    }

    let cfg = TransferConfig { seed: 1, ..Preset::TableDefaults.config() };
    for m in [Method::Meta, Method::Herd] {
        let run = run_method(m, &alphas[0], &alphas[1..], &expert, &trainer, &cfg).unwrap();
        let r = &run.report;
        let finals: Vec<String> = r.paths.iter().map(|p| format!("{:.2}", p.final_success_rate.unwrap_or(0.0))).collect();
        println!(
            "{m}: {} phases, {} sim episodes, final success [{}]",
            r.phase_count(),
            r.totals.sim_episodes,
            finals.join(", ")
        );
    }
}
