//! Meta-robot selection and target partitioning from a Steiner tree rooted
//! at the current intermediate robot.

use serde::{Deserialize, Serialize};

use crate::geometry::{
    check_points, dist, steiner_tree_preferring, GeometryError, Norm, Point, Result, Tree,
    MERGE_TOLERANCE,
};

/// `alpha` counts as sitting on a Steiner vertex when closer than this.
pub const SPLIT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTreeResult {
    /// Next meta robot: `alpha`'s neighbour on the trunk, or `alpha` itself
    /// when the paths split here.
    pub beta_meta: Point,
    /// Disjoint cover of the target indices. A single subset unless
    /// `beta_meta == alpha`.
    pub partition: Vec<Vec<usize>>,
    /// Steiner tree over `alpha` (terminal 0) followed by the targets.
    pub tree: Tree,
}

impl EvolutionTreeResult {
    pub fn is_split(&self) -> bool {
        self.partition.len() > 1
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvolutionTreeOptions {
    /// Targets within this distance (tree norm) of `alpha` are treated as
    /// reached and emitted as singleton subsets.
    pub reach_radius: f64,
    pub split_tolerance: f64,
}

impl Default for EvolutionTreeOptions {
    fn default() -> Self {
        EvolutionTreeOptions {
            reach_radius: MERGE_TOLERANCE,
            split_tolerance: SPLIT_TOLERANCE,
        }
    }
}

/// Element-wise clamp of `alpha` into the bounding box of the targets.
///
/// Under the L1 norm this is the first meta robot met when leaving `alpha`
/// along an optimal Steiner tree.
pub fn clamp_meta(alpha: &Point, targets: &[Point]) -> Result<Point> {
    let mut all = vec![alpha.clone()];
    all.extend(targets.iter().cloned());
    check_points(&all)?;
    if targets.is_empty() {
        return Err(GeometryError::InvalidInput("no targets".into()));
    }
    Ok(Point::new(
        (0..alpha.dim())
            .map(|d| {
                let lo = targets.iter().map(|t| t[d]).fold(f64::INFINITY, f64::min);
                let hi = targets.iter().map(|t| t[d]).fold(f64::NEG_INFINITY, f64::max);
                alpha[d].min(hi).max(lo)
            })
            .collect(),
    ))
}

/// Groups the terminals of `tree` by the neighbour of `meta` through which
/// they are reached. Terminals located at `meta` itself are not included.
/// Returned indices are input terminal indices.
pub fn partition_targets(tree: &Tree, meta: &Point) -> Result<Vec<Vec<usize>>> {
    let v = tree
        .find_vertex(meta, MERGE_TOLERANCE)
        .ok_or_else(|| GeometryError::InvalidInput(format!("{meta} is not a tree vertex")))?;
    Ok(partition_around(tree, &[v]))
}

/// Partition of terminals by the subtrees hanging off the vertex group
/// `center` (treated as a single contracted vertex).
fn partition_around(tree: &Tree, center: &[usize]) -> Vec<Vec<usize>> {
    let adj = tree.adjacency();
    let mut component = vec![usize::MAX; tree.vertices.len()];
    for &c in center {
        component[c] = usize::MAX - 1;
    }
    let mut roots = Vec::new();
    for &c in center {
        for &n in &adj[c] {
            if component[n] == usize::MAX {
                roots.push(n);
                let id = roots.len() - 1;
                let mut stack = vec![n];
                component[n] = id;
                while let Some(x) = stack.pop() {
                    for &y in &adj[x] {
                        if component[y] == usize::MAX {
                            component[y] = id;
                            stack.push(y);
                        }
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); roots.len()];
    for (i, &v) in tree.terminals.iter().enumerate() {
        if component[v] < roots.len() {
            groups[component[v]].push(i);
        }
    }
    groups.retain(|g| !g.is_empty());
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    groups
}

/// Determines the next meta robot and the target partition from the
/// `norm`-Steiner tree over `alpha` and the targets.
pub fn evolution_tree(alpha: &Point, targets: &[Point], norm: Norm) -> Result<EvolutionTreeResult> {
    evolution_tree_with(alpha, targets, norm, &EvolutionTreeOptions::default())
}

pub fn evolution_tree_with(
    alpha: &Point,
    targets: &[Point],
    norm: Norm,
    opts: &EvolutionTreeOptions,
) -> Result<EvolutionTreeResult> {
    if targets.is_empty() {
        return Err(GeometryError::InvalidInput("no targets".into()));
    }
    let mut all = vec![alpha.clone()];
    all.extend(targets.iter().cloned());
    check_points(&all)?;

    let reach = opts.reach_radius.max(MERGE_TOLERANCE);
    let (reached, pending): (Vec<usize>, Vec<usize>) =
        (0..targets.len()).partition(|&i| dist(alpha, &targets[i], norm) < reach);

    // Tree over alpha plus the targets still ahead (all targets if none are).
    let ahead: Vec<usize> = if pending.is_empty() { reached.clone() } else { pending.clone() };
    let ahead_points: Vec<Point> = ahead.iter().map(|&i| targets[i].clone()).collect();
    let tree = build_tree(alpha, &ahead_points, norm)?;
    let to_targets = |groups: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
        groups
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .filter(|&t| t > 0)
                    .map(|t| ahead[t - 1])
                    .collect::<Vec<_>>()
            })
            .filter(|g: &Vec<usize>| !g.is_empty())
            .collect()
    };

    if !reached.is_empty() {
        let mut partition: Vec<Vec<usize>> = reached.iter().map(|&i| vec![i]).collect();
        if !pending.is_empty() {
            partition.extend(to_targets(partition_around(&tree, &[0])));
        }
        partition.sort();
        return Ok(EvolutionTreeResult {
            beta_meta: alpha.clone(),
            partition,
            tree,
        });
    }

    let neighbors = tree.neighbors(0);
    let (beta_meta, partition) = if neighbors.len() == 1 {
        let n = neighbors[0];
        let close = dist(&tree.vertices[n], alpha, norm) <= opts.split_tolerance;
        if close && !tree.is_terminal(n) {
            // alpha sits on the Steiner vertex: split here.
            (alpha.clone(), to_targets(partition_around(&tree, &[0, n])))
        } else {
            (tree.vertices[n].clone(), vec![(0..targets.len()).collect()])
        }
    } else {
        (alpha.clone(), to_targets(partition_around(&tree, &[0])))
    };
    Ok(EvolutionTreeResult {
        beta_meta,
        partition,
        tree,
    })
}

/// Steiner tree with `alpha` as terminal 0.
///
/// For L1, when `alpha` lies outside the targets' bounding box the optimal
/// tree decomposes into the straight edge from `alpha` to its clamp point
/// plus an optimal tree over the targets and that clamp point; the clamp
/// point is then forced to be a vertex.
fn build_tree(alpha: &Point, targets: &[Point], norm: Norm) -> Result<Tree> {
    let mut terminals = vec![alpha.clone()];
    terminals.extend(targets.iter().cloned());
    if norm == Norm::L2 {
        return steiner_tree_preferring(&terminals, norm, 0);
    }
    let clamp = clamp_meta(alpha, targets)?;
    if dist(alpha, &clamp, Norm::L1) <= MERGE_TOLERANCE {
        return steiner_tree_preferring(&terminals, norm, 0);
    }
    // Inner problem: clamp point first, then the targets.
    let mut inner_terms = vec![clamp.clone()];
    inner_terms.extend(targets.iter().cloned());
    let inner = steiner_tree_preferring(&inner_terms, norm, 0)?;
    Ok(graft(alpha, &inner))
}

/// Attaches `alpha` to vertex `inner.terminals[0]` and renumbers so that
/// alpha and the targets are the leading terminal vertices.
fn graft(alpha: &Point, inner: &Tree) -> Tree {
    let clamp_vertex = inner.terminals[0];
    // Terminal vertices of the outer tree: alpha, then distinct targets.
    let mut vertices = vec![alpha.clone()];
    let mut map = vec![usize::MAX; inner.vertices.len()];
    let mut terminal_map = vec![0usize];
    for &v in &inner.terminals[1..] {
        if map[v] == usize::MAX {
            map[v] = vertices.len();
            vertices.push(inner.vertices[v].clone());
        }
        terminal_map.push(map[v]);
    }
    let terminal_count = vertices.len();
    for (v, p) in inner.vertices.iter().enumerate() {
        if map[v] == usize::MAX {
            map[v] = vertices.len();
            vertices.push(p.clone());
        }
    }
    let mut edges: Vec<(usize, usize)> = inner.edges.iter().map(|&(a, b)| (map[a], map[b])).collect();
    edges.push((0, map[clamp_vertex]));
    Tree::from_raw(vertices, terminal_count, edges, Norm::L1).with_terminal_map(terminal_map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec())
    }

    #[test]
    fn single_target_is_the_meta_robot() {
        for norm in [Norm::L1, Norm::L2] {
            let r = evolution_tree(&p(&[0.1, 0.2]), &[p(&[0.8, 0.7])], norm).unwrap();
            assert_eq!(r.beta_meta, p(&[0.8, 0.7]));
            assert_eq!(r.partition, vec![vec![0]]);
        }
    }

    #[test]
    fn opposite_targets_split_immediately() {
        let alpha = p(&[0.5, 0.5]);
        let targets = [p(&[0.0, 0.5]), p(&[1.0, 0.5])];
        for norm in [Norm::L1, Norm::L2] {
            let r = evolution_tree(&alpha, &targets, norm).unwrap();
            assert_eq!(r.beta_meta, alpha);
            assert_eq!(r.partition, vec![vec![0], vec![1]]);
        }
    }

    #[test]
    fn clustered_targets_share_a_trunk() {
        let alpha = p(&[0.0, 0.0]);
        let targets = [p(&[1.0, 0.9]), p(&[1.0, 1.0]), p(&[0.9, 1.0])];
        let r = evolution_tree(&alpha, &targets, Norm::L1).unwrap();
        assert_eq!(r.partition, vec![vec![0, 1, 2]]);
        assert_eq!(r.tree.degree(0), 1);
        assert!((r.beta_meta[0] - 0.9).abs() < 1e-12 && (r.beta_meta[1] - 0.9).abs() < 1e-12);
        assert!((r.tree.length - 2.1).abs() < 1e-9);
    }

    #[test]
    fn clamp_matches_direct_formula() {
        let c = clamp_meta(&p(&[0.5, 0.5]), &[p(&[0.2, 0.9]), p(&[0.4, 0.1])]).unwrap();
        assert_eq!(c, p(&[0.4, 0.5]));
        let inside = clamp_meta(&p(&[0.3, 0.5]), &[p(&[0.2, 0.9]), p(&[0.4, 0.1])]).unwrap();
        assert_eq!(inside, p(&[0.3, 0.5]));
    }

    #[test]
    fn partition_of_star_and_path() {
        // Star: center 3 with three leaves.
        let star = Tree::from_raw(
            vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0]), p(&[0.0, 1.0]), p(&[0.0, 0.0])],
            3,
            vec![(0, 3), (1, 3), (2, 3)],
            Norm::L1,
        );
        let parts = partition_targets(&star, &p(&[0.0, 0.0])).unwrap();
        assert_eq!(parts, vec![vec![0], vec![1], vec![2]]);

        // Path meta - a - b1 - b2 with meta as terminal 0.
        let path = Tree::from_raw(
            vec![p(&[0.0]), p(&[2.0]), p(&[3.0]), p(&[1.0])],
            3,
            vec![(0, 3), (3, 1), (1, 2)],
            Norm::L1,
        );
        let parts = partition_targets(&path, &p(&[0.0])).unwrap();
        assert_eq!(parts, vec![vec![1, 2]]);
        assert!(partition_targets(&path, &p(&[7.0])).is_err());
    }

    #[test]
    fn idempotent_at_target() {
        let b = p(&[0.3, 0.6, 0.9]);
        for norm in [Norm::L1, Norm::L2] {
            let r = evolution_tree(&b, std::slice::from_ref(&b), norm).unwrap();
            assert_eq!(r.beta_meta, b);
            assert_eq!(r.partition, vec![vec![0]]);
        }
    }

    #[test]
    fn reached_targets_become_singletons() {
        let alpha = p(&[0.5, 0.5]);
        let targets = [p(&[0.5, 0.52]), p(&[1.0, 1.0]), p(&[1.0, 0.9])];
        let opts = EvolutionTreeOptions {
            reach_radius: 0.03,
            ..Default::default()
        };
        let r = evolution_tree_with(&alpha, &targets, Norm::L1, &opts).unwrap();
        assert_eq!(r.beta_meta, alpha);
        assert_eq!(r.partition, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn dimension_mismatch_is_invalid() {
        assert!(evolution_tree(&p(&[0.0, 0.0]), &[p(&[1.0])], Norm::L1).is_err());
        assert!(evolution_tree(&p(&[0.0]), &[], Norm::L1).is_err());
    }
}
