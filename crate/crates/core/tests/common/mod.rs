//! Independent reference implementations shared by integration tests.
#![allow(dead_code)]

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Plain O(n^2) Prim; returns (length, edges).
pub fn mst(points: &[Vec<f64>], d: fn(&[f64], &[f64]) -> f64) -> (f64, Vec<(usize, usize)>) {
    let n = points.len();
    if n < 2 {
        return (0.0, vec![]);
    }
    let mut used = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    used[0] = true;
    for j in 1..n {
        best[j] = (d(&points[0], &points[j]), 0);
    }
    let mut total = 0.0;
    let mut edges = vec![];
    for _ in 1..n {
        let j = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0))
            .unwrap();
        used[j] = true;
        total += best[j].0;
        edges.push((best[j].1, j));
        for k in 0..n {
            if !used[k] {
                let dk = d(&points[j], &points[k]);
                if dk < best[k].0 {
                    best[k] = (dk, j);
                }
            }
        }
    }
    (total, edges)
}

/// Every rectilinear Steiner tree over the terminals whose Steiner points are
/// a subset (size <= n - 2) of the Hanan grid, scored by spanning-tree length.
/// Calls `visit(length, points, edges)` for each candidate.
pub fn for_each_hanan_tree(
    terminals: &[Vec<f64>],
    mut visit: impl FnMut(f64, &[Vec<f64>], &[(usize, usize)]),
) {
    let dim = terminals[0].len();
    let mut axes: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut v: Vec<f64> = terminals.iter().map(|t| t[k]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes.drain(..) {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    grid.retain(|g| terminals.iter().all(|t| l1(t, g) > 0.0));
    let k_max = terminals.len().saturating_sub(2);
    let mut chosen: Vec<usize> = vec![];
    fn rec(
        start: usize,
        k_max: usize,
        grid: &[Vec<f64>],
        terminals: &[Vec<f64>],
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(f64, &[Vec<f64>], &[(usize, usize)]),
    ) {
        let mut pts: Vec<Vec<f64>> = terminals.to_vec();
        pts.extend(chosen.iter().map(|&i| grid[i].clone()));
        let (len, edges) = mst(&pts, l1);
        visit(len, &pts, &edges);
        if chosen.len() == k_max {
            return;
        }
        for i in start..grid.len() {
            chosen.push(i);
            rec(i + 1, k_max, grid, terminals, chosen, visit);
            chosen.pop();
        }
    }
    rec(0, k_max, &grid, terminals, &mut chosen, &mut visit);
}

/// Exact rectilinear Steiner minimum tree length.
pub fn l1_smt_length(terminals: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for_each_hanan_tree(terminals, |len, _, _| best = best.min(len));
    best
}

/// Neighbour of terminal 0 once Steiner leaves are pruned and degree-2
/// Steiner points are walked through. `None` when terminal 0 has degree > 1.
pub fn first_branch_point(
    points: &[Vec<f64>],
    terminal_count: usize,
    edges: &[(usize, usize)],
) -> Option<Vec<f64>> {
    let n = points.len();
    let mut adj: Vec<Vec<usize>> = vec![vec![]; n];
    for &(a, b) in edges {
        if l1(&points[a], &points[b]) == 0.0 {
            continue;
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    loop {
        let leaf = (terminal_count..n).find(|&v| adj[v].len() == 1);
        let Some(v) = leaf else { break };
        let u = adj[v][0];
        adj[v].clear();
        adj[u].retain(|&x| x != v);
    }
    if adj[0].len() != 1 {
        return None;
    }
    let (mut prev, mut cur) = (0, adj[0][0]);
    while cur >= terminal_count && adj[cur].len() == 2 {
        let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
        prev = cur;
        cur = next;
    }
    Some(points[cur].clone())
}

pub fn unique(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![];
    for p in points {
        if out.iter().all(|u| l1(u, p) > 0.0) {
            out.push(p.clone());
        }
    }
    out
}

/// Random L1 test instance: dimension 1..=3, 1..=4 targets in the unit cube,
/// optionally snapped to a grid to provoke ties.
pub struct Instance {
    pub alpha: Vec<f64>,
    pub targets: Vec<Vec<f64>>,
}

impl Instance {
    pub fn random(seed: u64, quantum: Option<f64>) -> Instance {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.random_range(1..=3);
        let n = rng.random_range(1..=4);
        let mut draw = || {
            (0..dim)
                .map(|_| {
                    let x: f64 = rng.random();
                    quantum.map_or(x, |q| (x / q).round() * q)
                })
                .collect::<Vec<f64>>()
        };
        let alpha = draw();
        let targets = (0..n).map(|_| draw()).collect();
        Instance { alpha, targets }
    }
}

/// Optimal tree length over alpha and the targets, plus the first meta robot
/// of every optimal Hanan-grid tree (alpha itself when paths split there or
/// a target sits on alpha).
pub fn optimal_first_branch_points(inst: &Instance) -> (f64, Vec<Vec<f64>>) {
    let mut terms = vec![inst.alpha.clone()];
    terms.extend(inst.targets.iter().cloned());
    let terms = unique(&terms);
    let at_target = inst.targets.iter().any(|t| l1(t, &inst.alpha) == 0.0);
    let best = l1_smt_length(&terms);
    let mut metas = vec![];
    for_each_hanan_tree(&terms, |len, pts, edges| {
        if len <= best + 1e-9 {
            let meta = first_branch_point(pts, terms.len(), edges)
                .filter(|_| !at_target)
                .unwrap_or_else(|| inst.alpha.clone());
            metas.push(meta);
        }
    });
    (best, metas)
}
