//! Finite simple directed graphs with a fixed edge enumeration.
//!
//! The order in which edges are stored is the enumeration `E(1) ⊂ E(2) ⊂ …`
//! used when building finite approximations of path collections: the first
//! `n` stored edges form `E(n)`. Every constructor documents its order and
//! is bit-stable for identical parameters.

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid edge at index {index}: {reason}")]
    InvalidInput { index: usize, reason: String },
    #[error("edge list line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("i/o error reading edge list: {0}")]
    Io(String),
}

/// Boundary condition for square lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Box,
    Torus,
}

/// Optional per-vertex coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexLabel {
    /// Lattice position relative to the designated origin.
    Lattice { x: i64, y: i64 },
    /// Generation in a rooted tree (root = 0).
    Generation(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
}

/// Immutable directed graph in compressed adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
    out_edges: Vec<EdgeId>,
    in_offsets: Vec<usize>,
    in_edges: Vec<EdgeId>,
    labels: Option<Vec<VertexLabel>>,
    origin: Option<VertexId>,
}

impl DirectedGraph {
    /// Builds a graph from edges in enumeration order.
    ///
    /// `vertex_count` of `None` means one past the largest id mentioned.
    pub fn from_edges(
        vertex_count: Option<usize>,
        edges: &[(VertexId, VertexId)],
        allow_self_loops: bool,
    ) -> Result<Self, GraphError> {
        let implied = edges.iter().map(|&(t, h)| t.max(h) + 1).max().unwrap_or(0);
        let vertex_count = match vertex_count {
            Some(n) if n < implied => {
                return Err(GraphError::InvalidParameter(format!(
                    "vertex count {n} too small for edge endpoint {}",
                    implied - 1
                )))
            }
            Some(n) => n,
            None => implied,
        };
        let mut seen = HashSet::with_capacity(edges.len());
        for (index, &(tail, head)) in edges.iter().enumerate() {
            if tail == head && !allow_self_loops {
                return Err(GraphError::InvalidInput {
                    index,
                    reason: format!("self-loop at vertex {tail}"),
                });
            }
            if !seen.insert((tail, head)) {
                return Err(GraphError::InvalidInput {
                    index,
                    reason: format!("duplicate edge ({tail}, {head})"),
                });
            }
        }
        let edges: Vec<Edge> = edges.iter().map(|&(tail, head)| Edge { tail, head }).collect();
        let (out_offsets, out_edges) = bucket(vertex_count, edges.iter().map(|e| e.tail));
        let (in_offsets, in_edges) = bucket(vertex_count, edges.iter().map(|e| e.head));
        Ok(Self {
            vertex_count,
            edges,
            out_offsets,
            out_edges,
            in_offsets,
            in_edges,
            labels: None,
            origin: None,
        })
    }

    fn with_labels(mut self, labels: Vec<VertexLabel>, origin: VertexId) -> Self {
        debug_assert_eq!(labels.len(), self.vertex_count);
        self.labels = Some(labels);
        self.origin = Some(origin);
        self
    }

    /// `L×L` nearest-neighbour lattice with both directed edges per adjacent pair.
    ///
    /// Vertex `row * L + col` sits at `(col - L/2, row - L/2)`, so the origin is
    /// the centre for odd `L` and the upper-right of the four central points for
    /// even `L`. Edges are ordered row-major by tail, then by direction N, E, S, W
    /// (N increases the row).
    pub fn square_lattice(side: usize, boundary: Boundary) -> Result<Self, GraphError> {
        if side < 2 {
            return Err(GraphError::InvalidParameter(format!(
                "side length must be at least 2, got {side}"
            )));
        }
        if boundary == Boundary::Torus && side < 3 {
            return Err(GraphError::InvalidParameter(
                "torus side length must be at least 3 to keep the graph simple".into(),
            ));
        }
        let l = side as i64;
        let mut edges = Vec::with_capacity(4 * side * side);
        for row in 0..l {
            for col in 0..l {
                let tail = (row * l + col) as usize;
                for (dr, dc) in [(1, 0), (0, 1), (-1, 0), (0, -1)] {
                    let (r, c) = (row + dr, col + dc);
                    let head = match boundary {
                        Boundary::Box if r < 0 || r >= l || c < 0 || c >= l => continue,
                        Boundary::Box => r * l + c,
                        Boundary::Torus => r.rem_euclid(l) * l + c.rem_euclid(l),
                    };
                    edges.push((tail, head as usize));
                }
            }
        }
        let labels = (0..l)
            .flat_map(|row| (0..l).map(move |col| VertexLabel::Lattice { x: col - l / 2, y: row - l / 2 }))
            .collect();
        let origin = ((l / 2) * l + l / 2) as usize;
        Ok(Self::from_edges(Some(side * side), &edges, false)?.with_labels(labels, origin))
    }

    /// Rooted `d`-ary tree of the given depth, vertices and edges in breadth-first order.
    pub fn rooted_tree(out_degree: usize, depth: u32) -> Result<Self, GraphError> {
        if out_degree == 0 {
            return Err(GraphError::InvalidParameter("tree out-degree must be at least 1".into()));
        }
        let mut labels = vec![VertexLabel::Generation(0)];
        let mut edges = Vec::new();
        let mut layer = 0..1usize;
        for generation in 1..=depth {
            let start = labels.len();
            for parent in layer.clone() {
                for _ in 0..out_degree {
                    edges.push((parent, labels.len()));
                    labels.push(VertexLabel::Generation(generation));
                }
            }
            layer = start..labels.len();
        }
        let n = labels.len();
        Ok(Self::from_edges(Some(n), &edges, false)?.with_labels(labels, 0))
    }

    /// Origin of the square lattice and its four neighbours, with both directed
    /// edges between the origin and each neighbour.
    ///
    /// Vertex 0 is the origin; vertices 1..=4 are (0,1), (1,0), (0,-1), (-1,0).
    /// Edges 0..4 leave the origin towards 1..=4, edges 4..8 return.
    pub fn counterexample() -> Self {
        let coords = [(0, 0), (0, 1), (1, 0), (0, -1), (-1, 0)];
        let mut edges: Vec<_> = (1..5).map(|v| (0, v)).collect();
        edges.extend((1..5).map(|v| (v, 0)));
        let labels = coords.iter().map(|&(x, y)| VertexLabel::Lattice { x, y }).collect();
        Self::from_edges(Some(5), &edges, false)
            .expect("fixed counterexample graph is simple")
            .with_labels(labels, 0)
    }

    /// Reads the `tail head` per line edge-list format. Blank lines and `#` comments are skipped.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut it = body.split_whitespace();
            let mut next = || -> Result<VertexId, GraphError> {
                let tok = it.next().ok_or_else(|| GraphError::Parse {
                    line: lineno + 1,
                    reason: "expected `tail head`".into(),
                })?;
                tok.parse().map_err(|_| GraphError::Parse {
                    line: lineno + 1,
                    reason: format!("not a vertex id: {tok:?}"),
                })
            };
            let pair = (next()?, next()?);
            if it.next().is_some() {
                return Err(GraphError::Parse { line: lineno + 1, reason: "trailing tokens".into() });
            }
            edges.push(pair);
        }
        Self::from_edges(None, &edges, false)
    }

    pub fn load_edge_list(path: &FsPath) -> Result<Self, GraphError> {
        let file = std::fs::File::open(path).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))?;
        Self::read_edge_list(std::io::BufReader::new(file))
    }

    pub fn write_edge_list<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {}", e.tail, e.head)?;
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id]
    }

    /// Out-edges `E'_v` in enumeration order.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// In-edges `E*_v` in enumeration order.
    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// The edge `tail → head`, if present.
    pub fn find_edge(&self, tail: VertexId, head: VertexId) -> Option<EdgeId> {
        if tail >= self.vertex_count {
            return None;
        }
        self.out_edges(tail).iter().copied().find(|&e| self.edges[e].head == head)
    }

    pub fn label(&self, v: VertexId) -> Option<VertexLabel> {
        self.labels.as_ref().map(|l| l[v])
    }

    /// Vertex carrying the given lattice coordinates, if the graph is labelled.
    pub fn vertex_at(&self, x: i64, y: i64) -> Option<VertexId> {
        self.labels
            .as_ref()?
            .iter()
            .position(|&l| l == VertexLabel::Lattice { x, y })
    }

    /// Designated origin (lattice centre, tree root), if any.
    pub fn origin(&self) -> Option<VertexId> {
        self.origin
    }

    /// Vertices on the outer frame of a square-lattice box: those whose
    /// coordinates reach the extreme row or column. Empty for unlabelled graphs.
    pub fn box_boundary(&self) -> Vec<VertexId> {
        let Some(labels) = &self.labels else { return Vec::new() };
        let coords: Vec<(i64, i64)> = labels
            .iter()
            .filter_map(|l| match *l {
                VertexLabel::Lattice { x, y } => Some((x, y)),
                VertexLabel::Generation(_) => None,
            })
            .collect();
        if coords.len() != labels.len() || coords.is_empty() {
            return Vec::new();
        }
        let (xmin, xmax) = coords.iter().fold((i64::MAX, i64::MIN), |(a, b), &(x, _)| (a.min(x), b.max(x)));
        let (ymin, ymax) = coords.iter().fold((i64::MAX, i64::MIN), |(a, b), &(_, y)| (a.min(y), b.max(y)));
        coords
            .iter()
            .enumerate()
            .filter(|(_, &(x, y))| x == xmin || x == xmax || y == ymin || y == ymax)
            .map(|(v, _)| v)
            .collect()
    }

    /// Vertices of the given tree generation, in id order.
    pub fn generation(&self, g: u32) -> Vec<VertexId> {
        match &self.labels {
            Some(labels) => labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == VertexLabel::Generation(g))
                .map(|(v, _)| v)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Vertices reachable from `source` when only edges accepted by `open` may be used.
    pub fn reachable_from<F: Fn(EdgeId) -> bool>(&self, source: VertexId, open: F) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![source];
        seen[source] = true;
        while let Some(v) = stack.pop() {
            for &e in self.out_edges(v) {
                let h = self.edges[e].head;
                if !seen[h] && open(e) {
                    seen[h] = true;
                    stack.push(h);
                }
            }
        }
        seen
    }

    /// Vertices that can reach some vertex of `targets` using edges accepted by `open`.
    pub fn co_reachable_to<F: Fn(EdgeId) -> bool>(&self, targets: &[VertexId], open: F) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count];
        let mut stack = Vec::new();
        for &t in targets {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
        while let Some(v) = stack.pop() {
            for &e in self.in_edges(v) {
                let t = self.edges[e].tail;
                if !seen[t] && open(e) {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

impl fmt::Display for DirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph(|V|={}, |E|={})", self.vertex_count, self.edges.len())
    }
}

fn bucket(n: usize, keys: impl Iterator<Item = VertexId> + Clone) -> (Vec<usize>, Vec<EdgeId>) {
    let mut offsets = vec![0usize; n + 1];
    for k in keys.clone() {
        offsets[k + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut items = vec![0; offsets[n]];
    for (e, k) in keys.enumerate() {
        items[cursor[k]] = e;
        cursor[k] += 1;
    }
    (offsets, items)
}
