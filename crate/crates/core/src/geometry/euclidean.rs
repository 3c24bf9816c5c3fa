//! L2 (Euclidean) Steiner trees.

use nalgebra::{DMatrix, DVector};

use super::fermat::{angle_at, fermat_point};
use super::mst::raw_mst;
use super::tree::RawTree;
use super::{dist, GeometryError, Norm, Point, Result, Tree, EXACT_MAX_TERMINALS, MERGE_TOLERANCE};

const TWO_THIRDS_PI: f64 = 2.0 * std::f64::consts::PI / 3.0;

/// Enumerates every full Steiner topology on `n >= 3` terminals.
///
/// Terminals are vertices `0..n`, Steiner points `n..2n-2`. Topologies are
/// grown by splitting each edge of an `(k-1)`-terminal topology with a new
/// Steiner point that carries terminal `k`, giving `(2n-5)!!` topologies.
pub(crate) fn full_topologies(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n >= 3);
    let mut current = vec![vec![(0, n), (1, n), (2, n)]];
    for t in 3..n {
        let s = n + t - 2;
        let mut next = Vec::with_capacity(current.len() * (2 * t - 3));
        for topo in &current {
            for (i, &(a, b)) in topo.iter().enumerate() {
                let mut edges = topo.clone();
                edges.swap_remove(i);
                edges.extend([(a, s), (s, b), (t, s)]);
                next.push(edges);
            }
        }
        current = next;
    }
    current
}

/// Exact Euclidean Steiner tree by full-topology enumeration.
pub(crate) fn exact(terminals: &[Point]) -> Result<Tree> {
    let n = terminals.len();
    if n > EXACT_MAX_TERMINALS {
        return Err(GeometryError::BudgetExceeded(format!(
            "{n} terminals exceeds the exact limit of {EXACT_MAX_TERMINALS}"
        )));
    }
    if n <= 2 {
        let edges = if n == 2 { vec![(0, 1)] } else { vec![] };
        return Ok(Tree::from_raw(terminals.to_vec(), n, edges, Norm::L2));
    }
    let mut best: Option<Tree> = None;
    for edges in full_topologies(n) {
        let mut vertices = terminals.to_vec();
        vertices.extend((0..n - 2).map(|_| Point::zeros(terminals[0].dim())));
        let mut raw = RawTree {
            vertices,
            terminal_count: n,
            edges,
        };
        initialize_steiner_points(&mut raw);
        improve(&mut raw);
        let tree = Tree::from_raw(raw.vertices, n, raw.edges, Norm::L2);
        if best.as_ref().is_none_or(|b| tree.better_than(b)) {
            best = Some(tree);
        }
    }
    Ok(best.expect("at least one topology"))
}

/// Spanning tree followed by greedy Fermat-point insertion and polishing.
pub(crate) fn heuristic(terminals: &[Point]) -> Tree {
    let n = terminals.len();
    let mut raw = raw_mst(terminals.to_vec(), n, Norm::L2);
    improve(&mut raw);
    Tree::from_raw(raw.vertices, n, raw.edges, Norm::L2)
}

/// Places every Steiner point at the average of its neighbours
/// (Gauss-Seidel on the tree Laplacian with terminals pinned).
fn initialize_steiner_points(raw: &mut RawTree) {
    let n = raw.terminal_count;
    let dim = raw.vertices[0].dim();
    let centroid: Vec<f64> = (0..dim)
        .map(|d| raw.vertices[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
        .collect();
    for v in n..raw.vertices.len() {
        raw.vertices[v] = Point::new(centroid.clone());
    }
    let adjacency: Vec<Vec<usize>> = (0..raw.vertices.len()).map(|v| raw.neighbors(v)).collect();
    for _ in 0..200 {
        for v in n..raw.vertices.len() {
            let nb = &adjacency[v];
            let mut acc = vec![0.0; dim];
            for &u in nb {
                for d in 0..dim {
                    acc[d] += raw.vertices[u][d];
                }
            }
            raw.vertices[v] = Point::new(acc.into_iter().map(|x| x / nb.len() as f64).collect());
        }
    }
}

/// Alternates joint polishing with Fermat-point insertion at corners whose
/// angle is below 120 degrees, until the length stops dropping.
pub(crate) fn improve(raw: &mut RawTree) {
    for _ in 0..(8 * raw.vertices.len() + 32) {
        polish(raw);
        let before = (raw.vertices.len(), raw.edges.clone());
        raw.simplify(Norm::L2);
        if (raw.vertices.len(), &raw.edges) != (before.0, &before.1) {
            continue;
        }
        let scale = raw.length(Norm::L2).max(1.0);
        if !steinerize_once(raw, 1e-12 * scale) {
            break;
        }
    }
}

/// Inserts one Steiner point at the corner with the largest length gain.
fn steinerize_once(raw: &mut RawTree, min_gain: f64) -> bool {
    let mut best: Option<(f64, usize, usize, usize, Point)> = None;
    for v in 0..raw.vertices.len() {
        let nb = raw.neighbors(v);
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let (u, w) = (nb[i], nb[j]);
                let (pv, pu, pw) = (&raw.vertices[v], &raw.vertices[u], &raw.vertices[w]);
                if angle_at(pv, pu, pw) >= TWO_THIRDS_PI - 1e-12 {
                    continue;
                }
                let Ok(s) = fermat_point(pu, pv, pw) else {
                    continue;
                };
                let before = dist(pv, pu, Norm::L2) + dist(pv, pw, Norm::L2);
                let after =
                    dist(&s, pu, Norm::L2) + dist(&s, pv, Norm::L2) + dist(&s, pw, Norm::L2);
                let gain = before - after;
                if gain > min_gain && best.as_ref().is_none_or(|b| gain > b.0) {
                    best = Some((gain, v, u, w, s));
                }
            }
        }
    }
    let Some((_, v, u, w, s)) = best else {
        return false;
    };
    raw.edges
        .retain(|&(a, b)| !((a == v && (b == u || b == w)) || (b == v && (a == u || a == w))));
    let id = raw.vertices.len();
    raw.vertices.push(s);
    raw.edges.extend([(u, id), (v, id), (w, id)]);
    true
}

/// Minimizes the total length over Steiner coordinates with the topology
/// fixed (a convex problem), using damped Newton steps. Steiner points whose
/// optimum sits on a neighbour are contracted onto it.
pub(crate) fn polish(raw: &mut RawTree) {
    let dim = raw.vertices[0].dim();
    for _ in 0..300 {
        contract_short_edges(raw);
        let steiner: Vec<usize> = (raw.terminal_count..raw.vertices.len())
            .filter(|&v| !raw.neighbors(v).is_empty())
            .collect();
        if steiner.is_empty() {
            return;
        }
        let slot = |v: usize| steiner.iter().position(|&s| s == v);
        let k = steiner.len() * dim;
        let mut grad = DVector::<f64>::zeros(k);
        let mut hess = DMatrix::<f64>::zeros(k, k);
        let mut min_edge = f64::INFINITY;
        for &(a, b) in &raw.edges {
            let (sa, sb) = (slot(a), slot(b));
            if sa.is_none() && sb.is_none() {
                continue;
            }
            let diff = raw.vertices[a].sub(&raw.vertices[b]);
            let len = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
            min_edge = min_edge.min(len);
            let u: Vec<f64> = diff.iter().map(|x| x / len).collect();
            for d in 0..dim {
                if let Some(i) = sa {
                    grad[i * dim + d] += u[d];
                }
                if let Some(j) = sb {
                    grad[j * dim + d] -= u[d];
                }
            }
            for r in 0..dim {
                for c in 0..dim {
                    let h = ((r == c) as u8 as f64 - u[r] * u[c]) / len;
                    if let Some(i) = sa {
                        hess[(i * dim + r, i * dim + c)] += h;
                    }
                    if let Some(j) = sb {
                        hess[(j * dim + r, j * dim + c)] += h;
                    }
                    if let (Some(i), Some(j)) = (sa, sb) {
                        hess[(i * dim + r, j * dim + c)] -= h;
                        hess[(j * dim + r, i * dim + c)] -= h;
                    }
                }
            }
        }
        let gmax = grad.amax();
        if gmax < 1e-13 {
            return;
        }
        let scale = raw.length(Norm::L2).max(1e-300);
        let damping = 1e-10 / scale.min(min_edge.max(1e-12)) + 1e-12;
        let mut system = hess.clone();
        for i in 0..k {
            system[(i, i)] += damping * (1.0 + hess[(i, i)]);
        }
        let step = match system.clone().cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => -&grad,
        };
        let f0 = raw.length(Norm::L2);
        let saved: Vec<Point> = steiner.iter().map(|&s| raw.vertices[s].clone()).collect();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for (i, &s) in steiner.iter().enumerate() {
                let moved: Vec<f64> = (0..dim)
                    .map(|d| saved[i][d] + t * step[i * dim + d])
                    .collect();
                raw.vertices[s] = Point::new(moved);
            }
            let f1 = raw.length(Norm::L2);
            if f1 < f0 - 1e-4 * t * grad.dot(&(-&step)).max(0.0) || f1 < f0 {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            for (i, &s) in steiner.iter().enumerate() {
                raw.vertices[s] = saved[i].clone();
            }
        }
        let collapsed = collapse_if_optimal(raw, if accepted { 1e-6 * scale } else { f64::INFINITY });
        if !accepted && !collapsed {
            return;
        }
    }
}

fn contract_short_edges(raw: &mut RawTree) {
    raw.simplify_merges_only();
}

/// For Steiner points with an incident edge shorter than `radius`, checks
/// whether sitting exactly on that neighbour minimizes the length (the other
/// edges' unit pulls sum to at most one) and contracts if so.
fn collapse_if_optimal(raw: &mut RawTree, radius: f64) -> bool {
    let mut changed = false;
    'outer: loop {
        for s in raw.terminal_count..raw.vertices.len() {
            let nb = raw.neighbors(s);
            if nb.is_empty() {
                continue;
            }
            let mut order: Vec<usize> = nb.clone();
            order.sort_by(|&a, &b| {
                dist(&raw.vertices[s], &raw.vertices[a], Norm::L2)
                    .total_cmp(&dist(&raw.vertices[s], &raw.vertices[b], Norm::L2))
            });
            for &n in &order {
                if dist(&raw.vertices[s], &raw.vertices[n], Norm::L2) > radius {
                    break;
                }
                let target = raw.vertices[n].clone();
                let mut pull = vec![0.0; target.dim()];
                for &m in nb.iter().filter(|&&m| m != n) {
                    let diff = target.sub(&raw.vertices[m]);
                    let len = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if len == 0.0 {
                        continue;
                    }
                    for (p, d) in pull.iter_mut().zip(&diff) {
                        *p += d / len;
                    }
                }
                let mag = pull.iter().map(|x| x * x).sum::<f64>().sqrt();
                if mag <= 1.0 + 1e-12 {
                    raw.vertices[s] = target;
                    let (from, into) = if raw.is_steiner(n) { (s.max(n), s.min(n)) } else { (s, n) };
                    raw.contract(from, into);
                    changed = true;
                    continue 'outer;
                }
            }
        }
        break;
    }
    changed
}

impl RawTree {
    /// Contracts Steiner vertices coincident with a neighbour, without the
    /// degree pruning done by `simplify`.
    pub(crate) fn simplify_merges_only(&mut self) {
        loop {
            let hit = self.edges.iter().copied().find(|&(a, b)| {
                (self.is_steiner(a) || self.is_steiner(b))
                    && dist(&self.vertices[a], &self.vertices[b], Norm::L2) <= MERGE_TOLERANCE
            });
            let Some((a, b)) = hit else { break };
            let (from, into) = match (self.is_steiner(a), self.is_steiner(b)) {
                (true, false) => (a, b),
                (false, true) => (b, a),
                _ => (a.max(b), a.min(b)),
            };
            self.contract(from, into);
        }
    }
}
