//! Meta-Evolve against independent transfers and a single median meta robot
//! when every phase costs the same.

use meta_evolve::geometry::Point;
use meta_evolve::trainers::CostModelTrainer;
use meta_evolve::transfer::{run_method, Method, TransferConfig};

pub fn main() {
    let cases: [(&str, [f64; 2], Vec<[f64; 2]>, f64); 3] = [
        ("two near targets", [0.0, 0.5], vec![[1.0, 0.55], [1.0, 0.45]], 0.01),
        ("opposite targets", [0.5, 0.5], vec![[0.0, 0.5], [1.0, 0.5]], 0.01),
        ("clustered", [0.0, 0.0], vec![[0.6, 1.0], [1.0, 0.7], [1.0, 0.55]], 0.03),
    ];
    let trainer = CostModelTrainer::default();
    for (name, source, targets, xi) in cases {
        let cfg = TransferConfig { xi, gradient_samples: 0, ..Default::default() };
        let source = Point::from(source);
        let targets: Vec<Point> = targets.into_iter().map(Point::from).collect();
        let cost = |m| run_method(m, &source, &targets, &(), &trainer, &cfg).unwrap().report.totals.sim_episodes;
        let herd = cost(Method::Herd) as f64;
        println!("{name}:");
        for m in [Method::Meta, Method::Herd, Method::GeomMedian] {
            let c = cost(m);
            println!("  {m:>11}: {c:>6} episodes, speedup {:.3}", herd / c as f64);
        }
    }
}
