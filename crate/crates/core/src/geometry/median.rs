use super::{check_points, dist, Norm, Point, Result};

/// Point minimizing the sum of Lp distances to `points`.
///
/// For L1 this is the coordinate-wise median; with an even count the lower
/// of the two middle values is taken. For L2 an input point is returned when
/// it is itself optimal; otherwise a Weiszfeld iteration is refined with
/// Newton steps until the objective stalls.
pub fn geometric_median(points: &[Point], norm: Norm) -> Result<Point> {
    let dim = check_points(points)?;
    match norm {
        Norm::L1 => Ok(coordinatewise_median(points, dim)),
        Norm::L2 => Ok(euclidean_median(points, dim)),
    }
}

fn coordinatewise_median(points: &[Point], dim: usize) -> Point {
    let mid = (points.len() - 1) / 2;
    Point::new(
        (0..dim)
            .map(|d| {
                let mut vals: Vec<f64> = points.iter().map(|p| p[d]).collect();
                vals.sort_by(f64::total_cmp);
                vals[mid]
            })
            .collect(),
    )
}

fn objective(points: &[Point], x: &[f64]) -> f64 {
    points.iter().map(|p| dist(p, x, Norm::L2)).sum()
}

fn euclidean_median(points: &[Point], dim: usize) -> Point {
    if points.len() == 1 {
        return points[0].clone();
    }
    // An input point is optimal when the unit pulls of the others sum to at
    // most one in magnitude.
    let mut best_vertex: Option<(f64, usize)> = None;
    for (i, p) in points.iter().enumerate() {
        let mut pull = vec![0.0; dim];
        let mut weight = 1usize;
        for (j, q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let r = dist(p, q, Norm::L2);
            if r == 0.0 {
                weight += 1;
                continue;
            }
            for d in 0..dim {
                pull[d] += (q[d] - p[d]) / r;
            }
        }
        let mag = pull.iter().map(|x| x * x).sum::<f64>().sqrt();
        if mag <= weight as f64 {
            let f = objective(points, p);
            if best_vertex.is_none_or(|(bf, _)| f < bf) {
                best_vertex = Some((f, i));
            }
        }
    }
    if let Some((_, i)) = best_vertex {
        return points[i].clone();
    }

    let mut x: Vec<f64> = (0..dim)
        .map(|d| points.iter().map(|p| p[d]).sum::<f64>() / points.len() as f64)
        .collect();
    let mut fx = objective(points, &x);
    for _ in 0..10_000 {
        let mut num = vec![0.0; dim];
        let mut den = 0.0;
        for p in points {
            let r = dist(p, &x, Norm::L2).max(1e-300);
            den += 1.0 / r;
            for d in 0..dim {
                num[d] += p[d] / r;
            }
        }
        let next: Vec<f64> = num.iter().map(|v| v / den).collect();
        let fn_ = objective(points, &next);
        let done = fx - fn_ <= 1e-15 * fx.max(1.0);
        if fn_ <= fx {
            x = next;
            fx = fn_;
        }
        if done {
            break;
        }
    }
    // Newton refinement on the smooth objective.
    for _ in 0..20 {
        let mut g = nalgebra::DVector::<f64>::zeros(dim);
        let mut h = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        for p in points {
            let diff: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a - b).collect();
            let r = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r < 1e-300 {
                continue;
            }
            for a in 0..dim {
                g[a] += diff[a] / r;
                for b in 0..dim {
                    h[(a, b)] += ((a == b) as u8 as f64 - diff[a] * diff[b] / (r * r)) / r;
                }
            }
        }
        if g.amax() < 1e-14 {
            break;
        }
        let Some(step) = h.clone().lu().solve(&(-&g)) else {
            break;
        };
        let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + s).collect();
        let fc = objective(points, &cand);
        if fc < fx {
            x = cand;
            fx = fc;
        } else {
            break;
        }
    }
    Point::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn l1_median_of_corner_triangle() {
        let pts = [
            Point::from([0.0, 0.0]),
            Point::from([1.0, 0.0]),
            Point::from([0.0, 1.0]),
        ];
        assert_eq!(geometric_median(&pts, Norm::L1).unwrap(), Point::from([0.0, 0.0]));
    }

    #[test]
    fn l1_even_count_takes_lower_middle() {
        let pts = [Point::from([0.0]), Point::from([1.0]), Point::from([3.0]), Point::from([7.0])];
        assert_eq!(geometric_median(&pts, Norm::L1).unwrap(), Point::from([1.0]));
    }

    #[test]
    fn l2_equilateral_gives_centroid() {
        let pts = [
            Point::from([0.0, 0.0]),
            Point::from([1.0, 0.0]),
            Point::from([0.5, 3f64.sqrt() / 2.0]),
        ];
        let m = geometric_median(&pts, Norm::L2).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-9);
        assert!((m[1] - 3f64.sqrt() / 6.0).abs() < 1e-9);
    }

    #[test]
    fn l2_collinear_picks_middle_point() {
        let pts = [Point::from([0.0]), Point::from([1.0]), Point::from([10.0])];
        assert_eq!(geometric_median(&pts, Norm::L2).unwrap(), Point::from([1.0]));
    }

    #[test]
    fn l2_objective_is_near_optimal_on_a_square() {
        let pts = [
            Point::from([0.0, 0.0]),
            Point::from([1.0, 0.0]),
            Point::from([0.0, 1.0]),
            Point::from([1.0, 1.0]),
            Point::from([0.9, 0.8]),
        ];
        let m = geometric_median(&pts, Norm::L2).unwrap();
        let fm = objective(&pts, &m);
        // Dense grid search as an independent check.
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let x = [i as f64 / 400.0, j as f64 / 400.0];
                best = best.min(objective(&pts, &x));
            }
        }
        assert!(fm <= best + 1e-8);
    }

    #[test]
    fn mismatched_dimensions_error() {
        let pts = [Point::from([0.0, 0.0]), Point::from([1.0])];
        assert!(geometric_median(&pts, Norm::L2).is_err());
    }

    proptest! {
        #[test]
        fn l1_median_is_per_coordinate(raw in proptest::collection::vec(
            proptest::collection::vec(0.0f64..1.0, 3), 1..9)) {
            let pts: Vec<Point> = raw.iter().cloned().map(Point::new).collect();
            let m = geometric_median(&pts, Norm::L1).unwrap();
            for d in 0..3 {
                let column: Vec<Point> = pts.iter().map(|p| Point::new(vec![p[d]])).collect();
                let md = geometric_median(&column, Norm::L1).unwrap();
                prop_assert_eq!(m[d], md[0]);
            }
        }
    }
}
