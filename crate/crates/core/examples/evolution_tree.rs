//! Where the meta robot goes next, and when the paths split.

use meta_evolve::evotree::{clamp_meta, evolution_tree};
use meta_evolve::geometry::{Norm, Point};

pub fn main() {
    let targets: Vec<Point> = [[0.6, 1.0], [1.0, 0.7], [1.0, 0.55]].iter().map(|p| Point::from(*p)).collect();
    let mut alpha = Point::from([0.0, 0.0]);
    println!("clamp of the source into the target box: {:?}", clamp_meta(&alpha, &targets).unwrap().coords());

    // Follow the trunk until the first split.
    loop {
        let r = evolution_tree(&alpha, &targets, Norm::L1).unwrap();
        println!("at {:?}: tree length {:.3}", alpha.coords(), r.tree.length);
        if r.is_split() {
            println!("split into {:?}", r.partition);
            break;
        }
        alpha = r.beta_meta;
    }

    // Targets on opposite sides split at once.
    let r = evolution_tree(
        &Point::from([0.5, 0.5]),
        &[Point::from([0.0, 0.5]), Point::from([1.0, 0.5])],
        Norm::L2,
    )
    .unwrap();
    println!("opposite targets: split {} into {:?}", r.is_split(), r.partition);
}
