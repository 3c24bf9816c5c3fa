//! Rectilinear and Euclidean Steiner trees against the MST they improve on.

use meta_evolve::geometry::{
    fermat_point, geometric_median, minimum_spanning_tree, steiner_tree, Norm, Point, SteinerMode,
};

pub fn main() {
    let pts: Vec<Point> = [[0.0, 0.0], [1.0, 0.2], [0.4, 1.0], [0.9, 0.9]]
        .iter()
        .map(|p| Point::from(*p))
        .collect();
    for norm in [Norm::L1, Norm::L2] {
        let mst = minimum_spanning_tree(&pts, norm).unwrap();
        for mode in [SteinerMode::ExactSmall, SteinerMode::Heuristic] {
            let t = steiner_tree(&pts, norm, mode).unwrap();
            println!(
                "{norm} {mode:?}: length {:.4} (mst {:.4}), {} Steiner points",
                t.length,
                mst.length,
                t.vertices.len() - t.terminals.len()
            );
        }
    }

    let f = fermat_point(&pts[0], &pts[1], &pts[2]).unwrap();
    println!("Fermat point of the first three: {:?}", f.coords());
    for norm in [Norm::L1, Norm::L2] {
        println!("{norm} geometric median: {:?}", geometric_median(&pts, norm).unwrap().coords());
    }
}
