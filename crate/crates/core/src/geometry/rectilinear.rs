//! L1 (rectilinear) Steiner trees over the Hanan grid.

use super::mst::prim_len;
use super::tree::RawTree;
use super::{dist, GeometryError, Norm, Point, Result, Tree, EXACT_BUDGET, EXACT_MAX_TERMINALS};

/// Hanan grids larger than this fall back to triple-median candidates.
const HANAN_LIMIT: u64 = 50_000;

/// Bias subtracted from edges touching the preferred vertex so that, among
/// equal-length spanning trees, the one giving it the most neighbours wins.
const PREFERENCE_BIAS: f64 = 1e-11;

/// Sorted distinct coordinate values per dimension.
fn axis_values(points: &[Point]) -> Vec<Vec<f64>> {
    let dim = points[0].dim();
    (0..dim)
        .map(|d| {
            let mut vals: Vec<f64> = points.iter().map(|p| p[d]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            vals
        })
        .collect()
}

fn hanan_size(axes: &[Vec<f64>]) -> Option<u64> {
    axes.iter()
        .try_fold(1u64, |acc, a| acc.checked_mul(a.len() as u64))
}

/// Hanan grid points that are not terminals, in lexicographic order.
pub(crate) fn hanan_candidates(points: &[Point]) -> Vec<Point> {
    let axes = axis_values(points);
    let dim = axes.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let p = Point::new((0..dim).map(|d| axes[d][idx[d]]).collect());
        if !points.iter().any(|t| t.coords() == p.coords()) {
            out.push(p);
        }
        // Odometer increment, last axis fastest.
        let mut d = dim;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Coordinate-wise medians of all point triples (the L1 Steiner points of
/// three-terminal subproblems), excluding the points themselves.
fn triple_medians(points: &[Point]) -> Vec<Point> {
    let n = points.len();
    let dim = points[0].dim();
    let mut out: Vec<Point> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = Point::new(
                    (0..dim)
                        .map(|d| {
                            let mut v = [points[i][d], points[j][d], points[k][d]];
                            v.sort_by(f64::total_cmp);
                            v[1]
                        })
                        .collect(),
                );
                if !points.iter().any(|t| t.coords() == m.coords())
                    && !out.iter().any(|o| o.coords() == m.coords())
                {
                    out.push(m);
                }
            }
        }
    }
    out.sort_by(|a, b| a.lex_cmp(b));
    out
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

pub(crate) fn exact(terminals: &[Point]) -> Result<Tree> {
    exact_preferring(terminals, None)
}

/// Exhaustive search over subsets of at most `N - 2` Hanan grid points.
///
/// Every optimal rectilinear tree is a spanning tree of its terminals plus
/// Steiner points taken from the Hanan grid, so the minimum over subsets is
/// the optimum. `prefer` names a terminal whose degree is maximized among
/// equal-length optima.
pub(crate) fn exact_preferring(terminals: &[Point], prefer: Option<usize>) -> Result<Tree> {
    let n = terminals.len();
    if n > EXACT_MAX_TERMINALS {
        return Err(GeometryError::BudgetExceeded(format!(
            "{n} terminals exceeds the exact limit of {EXACT_MAX_TERMINALS}"
        )));
    }
    if n <= 2 {
        let edges = if n == 2 { vec![(0, 1)] } else { vec![] };
        return Ok(Tree::from_raw(terminals.to_vec(), n, edges, Norm::L1));
    }
    let axes = axis_values(terminals);
    let grid = hanan_size(&axes).unwrap_or(u64::MAX);
    let m = grid.saturating_sub(n as u64);
    let mut total: u64 = 0;
    for k in 0..=(n as u64 - 2) {
        total = binomial(m, k)
            .and_then(|c| total.checked_add(c))
            .unwrap_or(u64::MAX);
    }
    if grid > HANAN_LIMIT || total > EXACT_BUDGET {
        return Err(GeometryError::BudgetExceeded(format!(
            "{total} candidate subsets on a Hanan grid of {grid} points"
        )));
    }
    let candidates = hanan_candidates(terminals);
    let mut all = terminals.to_vec();
    all.extend(candidates.iter().cloned());
    let biased = |i: usize, j: usize| {
        let d = dist(&all[i], &all[j], Norm::L1);
        match prefer {
            Some(p) if i == p || j == p => d - PREFERENCE_BIAS,
            _ => d,
        }
    };

    let mut best: Option<(f64, Tree)> = None;
    let mut ids: Vec<usize> = (0..n).collect();
    let consider = |ids: &[usize], best: &mut Option<(f64, Tree)>| {
        let (score, edges) = prim_len(ids, biased);
        let tol = 1e-12;
        if let Some((b, _)) = best {
            if score > *b + tol {
                return;
            }
        }
        let raw = RawTree {
            vertices: ids.iter().map(|&i| all[i].clone()).collect(),
            terminal_count: n,
            edges,
        };
        let tree = Tree::from_raw(raw.vertices, n, raw.edges, Norm::L1);
        let tree_score = score_of(&tree, prefer);
        match best {
            Some((b, bt)) => {
                let better = tree_score < *b - tol
                    || ((tree_score - *b).abs() <= tol && tree.better_than(bt));
                if better {
                    *best = Some((tree_score, tree));
                }
            }
            None => *best = Some((tree_score, tree)),
        }
    };
    for k in 0..=(n - 2) {
        for_each_combination(candidates.len(), k, |combo| {
            ids.truncate(n);
            ids.extend(combo.iter().map(|&c| n + c));
            consider(&ids, &mut best);
        });
    }
    Ok(best.expect("at least the empty subset is scored").1)
}

fn score_of(tree: &Tree, prefer: Option<usize>) -> f64 {
    match prefer {
        Some(p) => tree.length - PREFERENCE_BIAS * tree.degree(p) as f64,
        None => tree.length,
    }
}

fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        f(&combo);
        if k == 0 {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if combo[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Iterated 1-Steiner insertion: add the Hanan grid point that shortens the
/// spanning tree the most, drop Steiner points left with degree below three,
/// and repeat until no insertion helps.
pub(crate) fn heuristic(terminals: &[Point]) -> Tree {
    heuristic_preferring(terminals, None)
}

pub(crate) fn heuristic_preferring(terminals: &[Point], prefer: Option<usize>) -> Tree {
    let n = terminals.len();
    if n <= 2 {
        let edges = if n == 2 { vec![(0, 1)] } else { vec![] };
        return Tree::from_raw(terminals.to_vec(), n, edges, Norm::L1);
    }
    let weight = |pts: &[Point], i: usize, j: usize| {
        let d = dist(&pts[i], &pts[j], Norm::L1);
        match prefer {
            Some(p) if i == p || j == p => d - PREFERENCE_BIAS,
            _ => d,
        }
    };
    let axes = axis_values(terminals);
    let use_grid = hanan_size(&axes).is_some_and(|g| g <= HANAN_LIMIT);
    let grid = if use_grid {
        hanan_candidates(terminals)
    } else {
        Vec::new()
    };

    let mut points = terminals.to_vec();
    let mut edges = biased_mst(&points, &weight);
    let mut current = edges_len(&points, &edges, &weight);
    loop {
        let candidates = if use_grid {
            grid.clone()
        } else {
            triple_medians(&points)
        };
        let scale = current.abs().max(1.0);
        let mut best: Option<(f64, usize)> = None;
        for (ci, c) in candidates.iter().enumerate() {
            if points.iter().any(|p| p.coords() == c.coords()) {
                continue;
            }
            let len = insertion_length(&points, &edges, c, &weight);
            let gain = current - len;
            if gain > 1e-12 * scale && best.is_none_or(|(g, _)| gain > g + 1e-14 * scale) {
                best = Some((gain, ci));
            }
        }
        let Some((_, ci)) = best else { break };
        points.push(candidates[ci].clone());
        edges = biased_mst(&points, &weight);
        // Prune Steiner points that ended up as leaves or pass-throughs.
        loop {
            let mut degree = vec![0usize; points.len()];
            for &(a, b) in &edges {
                degree[a] += 1;
                degree[b] += 1;
            }
            match (n..points.len()).rev().find(|&v| degree[v] <= 2) {
                Some(v) => {
                    points.remove(v);
                    edges = biased_mst(&points, &weight);
                }
                None => break,
            }
        }
        let next = edges_len(&points, &edges, &weight);
        if next >= current - 1e-12 * scale {
            break;
        }
        current = next;
    }
    Tree::from_raw(points, n, edges, Norm::L1)
}

fn biased_mst(
    points: &[Point],
    weight: &impl Fn(&[Point], usize, usize) -> f64,
) -> Vec<(usize, usize)> {
    let ids: Vec<usize> = (0..points.len()).collect();
    let (_, edges) = prim_len(&ids, |i, j| weight(points, i, j));
    edges
}

fn edges_len(
    points: &[Point],
    edges: &[(usize, usize)],
    weight: &impl Fn(&[Point], usize, usize) -> f64,
) -> f64 {
    edges.iter().map(|&(a, b)| weight(points, a, b)).sum()
}

/// Length of the spanning tree after adding `c`, computed with Kruskal over
/// the current tree edges plus every edge incident to `c`.
fn insertion_length(
    points: &[Point],
    edges: &[(usize, usize)],
    c: &Point,
    weight: &impl Fn(&[Point], usize, usize) -> f64,
) -> f64 {
    let n = points.len();
    let mut cand: Vec<(f64, usize, usize)> = edges
        .iter()
        .map(|&(a, b)| (weight(points, a, b), a, b))
        .collect();
    for (i, p) in points.iter().enumerate() {
        cand.push((dist(p, c, Norm::L1), i, n));
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut total = 0.0;
    for (w, a, b) in cand {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            total += w;
        }
    }
    total
}
