use std::f64::consts::PI;

use super::{check_points, GeometryError, Point, Result};

const TWO_THIRDS_PI: f64 = 2.0 * PI / 3.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Interior angle at `at` between the rays toward `p` and `q`.
pub(crate) fn angle_at(at: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let u: Vec<f64> = p.iter().zip(at).map(|(x, y)| x - y).collect();
    let v: Vec<f64> = q.iter().zip(at).map(|(x, y)| x - y).collect();
    let (nu, nv) = (norm2(&u), norm2(&v));
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot(&u, &v) / (nu * nv)).clamp(-1.0, 1.0).acos()
}

/// Point minimizing the sum of Euclidean distances to three points.
///
/// When every angle of the triangle is below 120 degrees this is the unique
/// interior point that sees each side under 120 degrees; otherwise it is the
/// vertex at the obtuse corner. A collinear (degenerate) triangle returns its
/// middle point.
pub fn fermat_point(a: &Point, b: &Point, c: &Point) -> Result<Point> {
    check_points(&[a.clone(), b.clone(), c.clone()])?;
    let pts = [a, b, c];
    for i in 0..3 {
        for j in i + 1..3 {
            if pts[i].coords() == pts[j].coords() {
                return Err(GeometryError::InvalidInput(
                    "fermat_point needs three distinct points".into(),
                ));
            }
        }
    }

    // Orthonormal frame of the triangle's plane, origin at `a`.
    let ab = b.sub(a);
    let ac = c.sub(a);
    let lab = norm2(&ab);
    let e1: Vec<f64> = ab.iter().map(|x| x / lab).collect();
    let proj = dot(&ac, &e1);
    let perp: Vec<f64> = ac.iter().zip(&e1).map(|(x, e)| x - proj * e).collect();
    let height = norm2(&perp);
    let scale = lab.max(norm2(&ac));
    if height <= 1e-12 * scale {
        // Collinear: the middle point along e1.
        let mut order = [(0.0, a), (lab, b), (proj, c)];
        order.sort_by(|x, y| x.0.total_cmp(&y.0));
        return Ok(order[1].1.clone());
    }
    let e2: Vec<f64> = perp.iter().map(|x| x / height).collect();

    for (i, &v) in pts.iter().enumerate() {
        let (p, q) = (pts[(i + 1) % 3], pts[(i + 2) % 3]);
        if angle_at(v, p, q) >= TWO_THIRDS_PI {
            return Ok(v.clone());
        }
    }

    let a2 = [0.0, 0.0];
    let b2 = [lab, 0.0];
    let c2 = [proj, height];
    // Apex of the equilateral triangle erected outward on side (p, q),
    // i.e. on the opposite side from `r`.
    let apex = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| -> [f64; 2] {
        let m = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
        let d = [q[0] - p[0], q[1] - p[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let mut n = [-d[1] / len, d[0] / len];
        if (r[0] - m[0]) * n[0] + (r[1] - m[1]) * n[1] > 0.0 {
            n = [-n[0], -n[1]];
        }
        let h = len * 3f64.sqrt() / 2.0;
        [m[0] + h * n[0], m[1] + h * n[1]]
    };
    let a_apex = apex(b2, c2, a2);
    let b_apex = apex(c2, a2, b2);
    // Intersect a2 + s (a_apex - a2) with b2 + t (b_apex - b2).
    let d1 = [a_apex[0] - a2[0], a_apex[1] - a2[1]];
    let d2 = [b_apex[0] - b2[0], b_apex[1] - b2[1]];
    let det = d1[0] * (-d2[1]) - d1[1] * (-d2[0]);
    let rhs = [b2[0] - a2[0], b2[1] - a2[1]];
    let s = (rhs[0] * (-d2[1]) - rhs[1] * (-d2[0])) / det;
    let x = a2[0] + s * d1[0];
    let y = a2[1] + s * d1[1];
    Ok(Point::new(
        a.iter()
            .zip(e1.iter().zip(&e2))
            .map(|(o, (u, v))| o + x * u + y * v)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual_angles(f: &Point, pts: &[&Point; 3]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max((angle_at(f, pts[i], pts[j]) - TWO_THIRDS_PI).abs());
            }
        }
        worst
    }

    /// Weiszfeld fixed point iteration, started from the centroid.
    fn weiszfeld(pts: &[&Point; 3]) -> Vec<f64> {
        let dim = pts[0].dim();
        let mut x: Vec<f64> = (0..dim)
            .map(|d| pts.iter().map(|p| p[d]).sum::<f64>() / 3.0)
            .collect();
        for _ in 0..20_000 {
            let mut num = vec![0.0; dim];
            let mut den = 0.0;
            for p in pts {
                let w = 1.0 / super::super::dist(&x, p, super::super::Norm::L2);
                den += w;
                for d in 0..dim {
                    num[d] += w * p[d];
                }
            }
            x = num.iter().map(|v| v / den).collect();
        }
        x
    }

    #[test]
    fn equilateral_gives_centroid() {
        let a = Point::from([0.0, 0.0]);
        let b = Point::from([1.0, 0.0]);
        let c = Point::from([0.5, 3f64.sqrt() / 2.0]);
        let f = fermat_point(&a, &b, &c).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-12);
        assert!((f[1] - 3f64.sqrt() / 6.0).abs() < 1e-12);
    }

    #[test]
    fn obtuse_corner_is_returned() {
        let a = Point::from([0.0, 0.0]);
        let b = Point::from([1.0, 0.0]);
        let d = Point::from([0.5, 0.1]);
        assert_eq!(fermat_point(&a, &b, &d).unwrap(), d);
    }

    #[test]
    fn right_isoceles_matches_weiszfeld_and_120_degrees() {
        let a = Point::from([0.0, 0.0]);
        let b = Point::from([1.0, 0.0]);
        let c = Point::from([0.0, 1.0]);
        let f = fermat_point(&a, &b, &c).unwrap();
        let oracle = weiszfeld(&[&a, &b, &c]);
        assert!(super::super::dist(&f, &oracle, super::super::Norm::L2) < 1e-9);
        assert!(residual_angles(&f, &[&a, &b, &c]) < 1e-6);
    }

    #[test]
    fn works_in_three_dimensions() {
        let a = Point::from([0.1, 0.2, 0.9]);
        let b = Point::from([0.8, 0.1, 0.3]);
        let c = Point::from([0.4, 0.9, 0.5]);
        let f = fermat_point(&a, &b, &c).unwrap();
        assert!(residual_angles(&f, &[&a, &b, &c]) < 1e-9);
        let oracle = weiszfeld(&[&a, &b, &c]);
        assert!(super::super::dist(&f, &oracle, super::super::Norm::L2) < 1e-9);
    }

    #[test]
    fn collinear_returns_middle() {
        let a = Point::from([0.0, 0.0]);
        let b = Point::from([2.0, 2.0]);
        let c = Point::from([1.0, 1.0]);
        assert_eq!(fermat_point(&a, &b, &c).unwrap(), c);
        assert_eq!(fermat_point(&c, &a, &b).unwrap(), c);
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let a = Point::from([0.0, 0.0]);
        assert!(fermat_point(&a, &a, &Point::from([1.0, 0.0])).is_err());
    }
}
