//! Matching hands with different finger counts into one evolution space and
//! building an intermediate robot.

use std::path::Path;

use meta_evolve::robot::{match_kinematics, EvolutionSpace, RobotSpec};

pub fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/hand");
    let specs: Vec<RobotSpec> = ["five_finger", "three_finger", "two_finger"]
        .iter()
        .map(|n| RobotSpec::load(dir.join(format!("{n}.json"))).unwrap())
        .collect();
    let matched = match_kinematics(&specs).unwrap();
    let space = EvolutionSpace::from_matched(&matched).unwrap();
    println!("{} dimensions: {:?}", space.dim(), space.keys);
    for (name, a) in matched.robots.iter().zip(space.robot_alphas(&matched).unwrap()) {
        println!("{name:>12}: {:?}", a.coords());
    }

    let alphas = space.robot_alphas(&matched).unwrap();
    let halfway = alphas[0].lerp(&alphas[2], 0.5);
    let robot = space.instantiate(&halfway, &matched, "halfway").unwrap();
    for b in &robot.bodies {
        let joints: Vec<String> = b.joints.iter().map(|j| format!("{} {:?} {:?}", j.name, j.kind, j.range)).collect();
        println!("  {} <- {:?}: {}", b.id, b.parent, joints.join(", "));
    }
    let back = space.normalize(&space.denormalize(&halfway).unwrap()).unwrap();
    assert!(back.iter().zip(halfway.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
}
