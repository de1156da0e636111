//! Bipartite multigraph between the disjoint tight sets (left) and the
//! clusters (right), with one edge per fractional element.

use serde::Serialize;

use crate::matroid::FaceDescription;
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Side {
    /// `Left(0)` is the non-tight remainder `O_0`, `Left(i)` is `O_i`.
    Left(usize),
    /// `Right(0)` collects elements outside every cluster; `Right(k)` is the
    /// `k`-th selected cluster (1-based).
    Right(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub label: usize,
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathKind {
    Cycle,
    LeftRight,
    RightRight,
}

/// Edge labels `v_1 .. v_l` walked from `start` to `end` (equal for cycles).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathSpec {
    pub labels: Vec<usize>,
    pub start: Side,
    pub end: Side,
    pub kind: PathKind,
}

impl PathSpec {
    /// The same walk in the opposite direction.
    pub fn reversed(&self) -> PathSpec {
        let mut labels = self.labels.clone();
        labels.reverse();
        PathSpec {
            labels,
            start: self.end,
            end: self.start,
            kind: self.kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundingGraph {
    pub left: usize,
    pub right: usize,
    /// Sorted by label.
    pub edges: Vec<Edge>,
}

impl RoundingGraph {
    /// `cluster_of[v]` is the 1-based cluster holding `v`, or 0.
    pub fn build(face: &FaceDescription, cluster_of: &[usize], right: usize, y: &[Rational]) -> RoundingGraph {
        let edges = (0..y.len())
            .filter(|&v| rational::is_fractional(&y[v]))
            .map(|v| Edge {
                label: v,
                left: face.owner(v),
                right: cluster_of[v],
            })
            .collect();
        RoundingGraph {
            left: face.o_sets.len() + 1,
            right,
            edges,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn node(&self, s: Side) -> usize {
        match s {
            Side::Left(i) => i,
            Side::Right(k) => self.left + k,
        }
    }

    fn side(&self, node: usize) -> Side {
        if node < self.left {
            Side::Left(node)
        } else {
            Side::Right(node - self.left)
        }
    }

    /// `(edge index, other endpoint)` for each edge at `node`, by label.
    fn incident(&self, node: usize) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(k, e)| {
                let (a, b) = (e.left, self.left + e.right);
                if a == node {
                    Some((k, b))
                } else if b == node {
                    Some((k, a))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, s: Side) -> usize {
        self.incident(self.node(s)).len()
    }

    fn endpoints(&self, k: usize) -> (usize, usize) {
        (self.edges[k].left, self.left + self.edges[k].right)
    }

    /// First simple path from `from` to `to` in label order, avoiding the
    /// edges in `banned` and with labels above `min_label`.
    fn lex_path(&self, from: usize, to: usize, min_label: usize, banned: usize) -> Option<Vec<usize>> {
        let mut visited = vec![false; self.left + self.right];
        let mut path = Vec::new();
        visited[from] = true;
        self.dfs(from, to, min_label, banned, &mut visited, &mut path).then_some(path)
    }

    fn dfs(&self, at: usize, to: usize, min_label: usize, banned: usize, visited: &mut [bool], path: &mut Vec<usize>) -> bool {
        for (k, next) in self.incident(at) {
            if k == banned || self.edges[k].label <= min_label {
                continue;
            }
            if next == to {
                path.push(k);
                return true;
            }
            if visited[next] {
                continue;
            }
            visited[next] = true;
            path.push(k);
            if self.dfs(next, to, min_label, banned, visited, path) {
                return true;
            }
            path.pop();
            visited[next] = false;
        }
        false
    }

    /// Lexicographically smallest cycle by label sequence (starting at its
    /// smallest label), if any.
    pub fn find_cycle(&self) -> Option<PathSpec> {
        for k in 0..self.edges.len() {
            let (a, b) = self.endpoints(k);
            let label = self.edges[k].label;
            let mut best: Option<(Vec<usize>, usize)> = None;
            for (from, to) in [(b, a), (a, b)] {
                if let Some(rest) = self.lex_path(from, to, label, k) {
                    let mut labels = vec![label];
                    labels.extend(rest.iter().map(|&e| self.edges[e].label));
                    if best.as_ref().is_none_or(|(l, _)| &labels < l) {
                        best = Some((labels, to));
                    }
                }
            }
            if let Some((labels, start)) = best {
                let s = self.side(start);
                return Some(PathSpec {
                    labels,
                    start: s,
                    end: s,
                    kind: PathKind::Cycle,
                });
            }
        }
        None
    }

    /// Leaf-to-leaf paths of a forest, each oriented by its smaller label
    /// sequence, except that paths touching `Left(0)` start there.
    pub fn maximal_paths(&self) -> Vec<PathSpec> {
        let nodes = self.left + self.right;
        let leaves: Vec<usize> = (0..nodes).filter(|&v| self.incident(v).len() == 1).collect();
        let mut out = Vec::new();
        for (a_pos, &a) in leaves.iter().enumerate() {
            let parent = self.tree_parents(a);
            for &b in &leaves[a_pos + 1..] {
                let Some(edges) = self.walk_back(&parent, a, b) else { continue };
                let labels: Vec<usize> = edges.iter().map(|&e| self.edges[e].label).collect();
                let (sa, sb) = (self.side(a), self.side(b));
                let kind = match (sa, sb) {
                    (Side::Right(_), Side::Right(_)) => PathKind::RightRight,
                    (Side::Left(_), Side::Left(_)) => continue,
                    _ => PathKind::LeftRight,
                };
                let spec = PathSpec {
                    labels,
                    start: sa,
                    end: sb,
                    kind,
                };
                let rev = spec.reversed();
                let spec = match kind {
                    PathKind::LeftRight if matches!(sb, Side::Left(_)) => rev,
                    PathKind::LeftRight => spec,
                    _ if rev.labels < spec.labels => rev,
                    _ => spec,
                };
                out.push(spec);
            }
        }
        out.sort_by(|a, b| a.labels.cmp(&b.labels));
        out
    }

    /// Parent edge of every node reachable from `root` (forest assumed).
    fn tree_parents(&self, root: usize) -> Vec<Option<(usize, usize)>> {
        let mut parent = vec![None; self.left + self.right];
        let mut seen = vec![false; self.left + self.right];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            for (k, w) in self.incident(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((k, v));
                    stack.push(w);
                }
            }
        }
        parent
    }

    /// Edges from `a` to `b` using the parent pointers rooted at `a`.
    fn walk_back(&self, parent: &[Option<(usize, usize)>], a: usize, b: usize) -> Option<Vec<usize>> {
        let mut edges = Vec::new();
        let mut v = b;
        while v != a {
            let (k, p) = parent[v]?;
            edges.push(k);
            v = p;
        }
        edges.reverse();
        Some(edges)
    }

    /// Graph vertex at each position along `path` (length `labels.len() + 1`).
    pub fn vertices_along(&self, path: &PathSpec) -> Vec<Side> {
        let mut at = self.node(path.start);
        let mut out = vec![path.start];
        for &label in &path.labels {
            let k = self.edges.iter().position(|e| e.label == label).expect("label is an edge");
            let (a, b) = self.endpoints(k);
            at = if a == at { b } else { a };
            out.push(self.side(at));
        }
        out
    }
}
