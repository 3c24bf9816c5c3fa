use super::tree::RawTree;
use super::{check_points, dedup, dist, Norm, Point, Result, Tree};

/// Minimum spanning tree over the terminals (no Steiner points).
pub fn minimum_spanning_tree(terminals: &[Point], norm: Norm) -> Result<Tree> {
    check_points(terminals)?;
    let (unique, map) = dedup(terminals);
    let edges = prim(&unique, norm);
    let n = unique.len();
    Ok(Tree::from_raw(unique, n, edges, norm).with_terminal_map(map))
}

/// Dense Prim's algorithm. Ties resolve to the lowest vertex index.
pub(crate) fn prim(points: &[Point], norm: Norm) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    in_tree[0] = true;
    for v in 1..n {
        best[v] = dist(&points[0], &points[v], norm);
    }
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best[v] < next_d {
                next_d = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next].min(next), parent[next].max(next)));
        for v in 0..n {
            if !in_tree[v] {
                let d = dist(&points[next], &points[v], norm);
                if d < best[v] {
                    best[v] = d;
                    parent[v] = next;
                }
            }
        }
    }
    edges
}

/// Prim over a precomputed distance lookup restricted to `ids`; returns the
/// total length and the edges as positions into `ids`.
pub(crate) fn prim_len(ids: &[usize], d: impl Fn(usize, usize) -> f64) -> (f64, Vec<(usize, usize)>) {
    let n = ids.len();
    if n < 2 {
        return (0.0, Vec::new());
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    in_tree[0] = true;
    for v in 1..n {
        best[v] = d(ids[0], ids[v]);
    }
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best[v] < next_d {
                next_d = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        total += next_d;
        edges.push((parent[next], next));
        for v in 0..n {
            if !in_tree[v] {
                let dv = d(ids[next], ids[v]);
                if dv < best[v] {
                    best[v] = dv;
                    parent[v] = next;
                }
            }
        }
    }
    (total, edges)
}

pub(crate) fn raw_mst(points: Vec<Point>, terminal_count: usize, norm: Norm) -> RawTree {
    let edges = prim(&points, norm);
    RawTree {
        vertices: points,
        terminal_count,
        edges,
    }
}
