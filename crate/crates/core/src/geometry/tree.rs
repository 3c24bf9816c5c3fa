use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{dist, GeometryError, Norm, Point, Result, MERGE_TOLERANCE};

/// An embedded tree over terminals and Steiner points.
///
/// The first `unique terminal count` vertices are terminals; any vertex not
/// referenced from `terminals` is a Steiner vertex. `terminals[i]` is the
/// vertex carrying input terminal `i` (coincident inputs share a vertex).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub vertices: Vec<Point>,
    pub terminals: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub norm: Norm,
    pub length: f64,
}

/// Sum of per-edge distances under the tree norm.
pub fn tree_length(t: &Tree) -> f64 {
    t.edges
        .iter()
        .map(|&(a, b)| dist(&t.vertices[a], &t.vertices[b], t.norm))
        .sum()
}

impl Tree {
    /// Normalizes a raw tree: contracts Steiner vertices that coincide with a
    /// neighbour, drops Steiner leaves, bypasses degree-two Steiner vertices,
    /// and renumbers Steiner vertices in lexicographic coordinate order.
    ///
    /// The first `terminal_count` entries of `vertices` are terminals.
    pub(crate) fn from_raw(
        vertices: Vec<Point>,
        terminal_count: usize,
        edges: Vec<(usize, usize)>,
        norm: Norm,
    ) -> Tree {
        let mut raw = RawTree {
            vertices,
            terminal_count,
            edges,
        };
        raw.simplify(norm);
        raw.finish(norm)
    }

    pub(crate) fn with_terminal_map(mut self, map: Vec<usize>) -> Tree {
        self.terminals = map;
        self
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, |p| p.dim())
    }

    /// Number of distinct terminal vertices.
    pub fn terminal_vertex_count(&self) -> usize {
        self.terminals.iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        v < self.terminal_vertex_count()
    }

    pub fn steiner_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.terminal_vertex_count()..self.vertices.len()
    }

    pub fn steiner_count(&self) -> usize {
        self.vertices.len() - self.terminal_vertex_count()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Index of the vertex within `tol` (tree norm) of `p`, if any.
    pub fn find_vertex(&self, p: &Point, tol: f64) -> Option<usize> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.dim() == p.dim())
            .map(|(i, v)| (i, dist(v, p, self.norm)))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    pub fn edge_length(&self, e: (usize, usize)) -> f64 {
        dist(&self.vertices[e.0], &self.vertices[e.1], self.norm)
    }

    /// Structural and metric self-check.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n == 0 {
            return Err(GeometryError::InvalidInput("tree has no vertices".into()));
        }
        if self.edges.len() + 1 != n {
            return Err(GeometryError::InvalidInput(format!(
                "{} vertices but {} edges",
                n,
                self.edges.len()
            )));
        }
        if self.terminals.iter().any(|&t| t >= n) {
            return Err(GeometryError::InvalidInput("terminal index out of range".into()));
        }
        let mut seen = vec![false; n];
        let adj = self.adjacency();
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(GeometryError::InvalidInput("tree is disconnected".into()));
        }
        let recomputed = tree_length(self);
        if (recomputed - self.length).abs() > 1e-9 * recomputed.max(1.0) {
            return Err(GeometryError::InvalidInput(format!(
                "stored length {} differs from edge sum {}",
                self.length, recomputed
            )));
        }
        let terminals = self.terminal_vertex_count();
        if self.steiner_count() + 2 > terminals.max(2) {
            return Err(GeometryError::InvalidInput(format!(
                "{} Steiner vertices for {} terminals",
                self.steiner_count(),
                terminals
            )));
        }
        if self.norm == Norm::L2 {
            for s in self.steiner_vertices() {
                if adj[s].len() != 3 {
                    return Err(GeometryError::InvalidInput(format!(
                        "Steiner vertex {s} has degree {}",
                        adj[s].len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Edge list as coordinate pairs, each pair and the whole list sorted
    /// lexicographically. Used to break ties between equal-length trees.
    pub(crate) fn canonical_edges(&self) -> Vec<(&Point, &Point)> {
        let mut out: Vec<(&Point, &Point)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (pa, pb) = (&self.vertices[a], &self.vertices[b]);
                if pa.lex_cmp(pb) == Ordering::Greater {
                    (pb, pa)
                } else {
                    (pa, pb)
                }
            })
            .collect();
        out.sort_by(|x, y| x.0.lex_cmp(y.0).then_with(|| x.1.lex_cmp(y.1)));
        out
    }

    /// Orders trees by length, then by canonical edge list.
    pub(crate) fn better_than(&self, other: &Tree) -> bool {
        let tol = 1e-12 * self.length.max(other.length).max(1.0);
        if self.length < other.length - tol {
            return true;
        }
        if self.length > other.length + tol {
            return false;
        }
        let (a, b) = (self.canonical_edges(), other.canonical_edges());
        for (x, y) in a.iter().zip(&b) {
            let o = x.0.lex_cmp(y.0).then_with(|| x.1.lex_cmp(y.1));
            if o != Ordering::Equal {
                return o == Ordering::Less;
            }
        }
        a.len() < b.len()
    }
}

/// Mutable working form used by the solvers before canonicalization.
#[derive(Clone, Debug)]
pub(crate) struct RawTree {
    pub vertices: Vec<Point>,
    pub terminal_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RawTree {
    pub fn is_steiner(&self, v: usize) -> bool {
        v >= self.terminal_count
    }

    pub fn length(&self, norm: Norm) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| dist(&self.vertices[a], &self.vertices[b], norm))
            .sum()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Merges vertex `from` into `into`, rewiring edges. `from` stays in the
    /// vertex list as an isolated vertex until `compact` runs.
    pub fn contract(&mut self, from: usize, into: usize) {
        for e in &mut self.edges {
            if e.0 == from {
                e.0 = into;
            }
            if e.1 == from {
                e.1 = into;
            }
        }
        self.edges.retain(|e| e.0 != e.1);
        let mut seen = std::collections::HashSet::new();
        self.edges.retain(|&(a, b)| seen.insert((a.min(b), a.max(b))));
    }

    /// Repeatedly contracts coincident Steiner vertices and removes Steiner
    /// vertices of degree below three.
    pub fn simplify(&mut self, norm: Norm) {
        loop {
            let mut changed = false;
            // Coincident endpoints.
            for i in 0..self.edges.len() {
                let (a, b) = self.edges[i];
                if !self.is_steiner(a) && !self.is_steiner(b) {
                    continue;
                }
                if dist(&self.vertices[a], &self.vertices[b], norm) <= MERGE_TOLERANCE {
                    let (from, into) = match (self.is_steiner(a), self.is_steiner(b)) {
                        (true, false) => (a, b),
                        (false, true) => (b, a),
                        _ => (a.max(b), a.min(b)),
                    };
                    self.contract(from, into);
                    changed = true;
                    break;
                }
            }
            if changed {
                continue;
            }
            // Low-degree Steiner vertices.
            for v in self.terminal_count..self.vertices.len() {
                let nb = self.neighbors(v);
                match nb.len() {
                    0 => {}
                    1 => {
                        self.edges.retain(|&(a, b)| a != v && b != v);
                        changed = true;
                    }
                    2 => {
                        self.edges.retain(|&(a, b)| a != v && b != v);
                        self.edges.push((nb[0], nb[1]));
                        changed = true;
                    }
                    _ => {}
                }
                if changed {
                    break;
                }
            }
            if !changed {
                break;
            }
        }
        self.compact();
    }

    /// Drops isolated Steiner vertices and renumbers the rest.
    pub fn compact(&mut self) {
        let n = self.vertices.len();
        let mut degree = vec![0usize; n];
        for &(a, b) in &self.edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut remap = vec![usize::MAX; n];
        let mut kept = Vec::with_capacity(n);
        for v in 0..n {
            if v < self.terminal_count || degree[v] > 0 {
                remap[v] = kept.len();
                kept.push(self.vertices[v].clone());
            }
        }
        for e in &mut self.edges {
            *e = (remap[e.0], remap[e.1]);
        }
        self.vertices = kept;
    }

    /// Sorts Steiner vertices and edges into canonical order.
    pub fn finish(mut self, norm: Norm) -> Tree {
        let t = self.terminal_count;
        let mut order: Vec<usize> = (t..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a].lex_cmp(&self.vertices[b]));
        let mut remap: Vec<usize> = (0..self.vertices.len()).collect();
        for (rank, &old) in order.iter().enumerate() {
            remap[old] = t + rank;
        }
        let mut vertices = self.vertices[..t].to_vec();
        vertices.extend(order.iter().map(|&o| self.vertices[o].clone()));
        for e in &mut self.edges {
            let (a, b) = (remap[e.0], remap[e.1]);
            *e = (a.min(b), a.max(b));
        }
        self.edges.sort_unstable();
        let mut tree = Tree {
            vertices,
            terminals: (0..t).collect(),
            edges: self.edges,
            norm,
            length: 0.0,
        };
        tree.length = tree_length(&tree);
        tree
    }
}
