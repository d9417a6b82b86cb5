use std::fmt;

use super::PathError;
use crate::graph::{DirectedGraph, EdgeId, VertexId};

/// A finite directed path, stored as its start vertex and edge sequence.
///
/// The vertex sequence is cached; a path with no edges is the trivial path
/// at its start vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    edges: Vec<EdgeId>,
    vertices: Vec<VertexId>,
}

impl Path {
    pub fn trivial(v: VertexId) -> Self {
        Self { edges: Vec::new(), vertices: vec![v] }
    }

    /// Path from `start` along `edges`, checked to chain head to tail.
    pub fn new(graph: &DirectedGraph, start: VertexId, edges: Vec<EdgeId>) -> Result<Self, PathError> {
        if start >= graph.vertex_count() {
            return Err(PathError::NotAPath(format!("start vertex {start} is not in the graph")));
        }
        let mut vertices = Vec::with_capacity(edges.len() + 1);
        vertices.push(start);
        for (i, &e) in edges.iter().enumerate() {
            if e >= graph.edge_count() {
                return Err(PathError::NotAPath(format!("edge {e} is not in the graph")));
            }
            let edge = graph.edge(e);
            let at = *vertices.last().expect("nonempty");
            if edge.tail != at {
                return Err(PathError::NotAPath(format!("edge {i} starts at {} but the path is at {at}", edge.tail)));
            }
            vertices.push(edge.head);
        }
        Ok(Self { edges, vertices })
    }

    /// Path through the given vertex sequence; every consecutive pair must be an edge.
    pub fn from_vertices(graph: &DirectedGraph, vertices: &[VertexId]) -> Result<Self, PathError> {
        let (&start, _) = vertices
            .split_first()
            .ok_or_else(|| PathError::NotAPath("empty vertex sequence".into()))?;
        let edges = vertices
            .windows(2)
            .map(|w| {
                graph
                    .find_edge(w[0], w[1])
                    .ok_or_else(|| PathError::NotAPath(format!("no edge {} -> {}", w[0], w[1])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(graph, start, edges)
    }

    pub(crate) fn from_parts(edges: Vec<EdgeId>, vertices: Vec<VertexId>) -> Self {
        debug_assert_eq!(edges.len() + 1, vertices.len());
        Self { edges, vertices }
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_trivial()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut seen: Vec<VertexId> = self.vertices.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// The first `n` edges.
    pub fn truncate(&self, n: usize) -> Result<Path, PathError> {
        if n > self.len() {
            return Err(PathError::InvalidArgument(format!("cannot truncate a path of length {} after {n} edges", self.len())));
        }
        Ok(Self { edges: self.edges[..n].to_vec(), vertices: self.vertices[..=n].to_vec() })
    }

    /// Everything after the first `n` edges, starting at the head of edge `n`.
    pub fn tail(&self, n: usize) -> Result<Path, PathError> {
        if n > self.len() {
            return Err(PathError::InvalidArgument(format!("no tail after {n} edges in a path of length {}", self.len())));
        }
        Ok(Self { edges: self.edges[n..].to_vec(), vertices: self.vertices[n..].to_vec() })
    }

    /// `self` followed by `other`.
    pub fn conjunction(&self, other: &Path) -> Result<Path, PathError> {
        if self.end() != other.start() {
            return Err(PathError::InvalidArgument(format!(
                "path ends at {} but the next one starts at {}",
                self.end(),
                other.start()
            )));
        }
        Ok(self.splice(self.len(), other, 0))
    }

    /// `self^s(i)` followed by `other^t(j)`; the caller guarantees the vertices agree.
    pub(crate) fn splice(&self, i: usize, other: &Path, j: usize) -> Path {
        debug_assert_eq!(self.vertices[i], other.vertices[j]);
        let mut edges = Vec::with_capacity(i + other.len() - j);
        edges.extend_from_slice(&self.edges[..i]);
        edges.extend_from_slice(&other.edges[j..]);
        let mut vertices = Vec::with_capacity(edges.len() + 1);
        vertices.extend_from_slice(&self.vertices[..i]);
        vertices.extend_from_slice(&other.vertices[j..]);
        Path { edges, vertices }
    }

    /// Chronological loop erasure: whenever a vertex repeats, the loop since
    /// its previous visit is cut out.
    pub fn loop_erased(&self) -> Path {
        let mut vertices: Vec<VertexId> = vec![self.start()];
        let mut edges: Vec<EdgeId> = Vec::new();
        for (k, &e) in self.edges.iter().enumerate() {
            let next = self.vertices[k + 1];
            if let Some(pos) = vertices.iter().position(|&v| v == next) {
                vertices.truncate(pos + 1);
                edges.truncate(pos);
            } else {
                vertices.push(next);
                edges.push(e);
            }
        }
        Path { edges, vertices }
    }

    pub fn is_open<F: Fn(EdgeId) -> bool>(&self, open: F) -> bool {
        self.edges.iter().all(|&e| open(e))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> DirectedGraph {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, i + 1)).collect();
        DirectedGraph::from_edges(None, &edges, false).unwrap()
    }

    #[test]
    fn truncate_and_tail() {
        let g = line(3);
        let p = Path::from_vertices(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(p.truncate(2).unwrap().vertices(), &[0, 1, 2]);
        assert_eq!(p.truncate(0).unwrap(), Path::trivial(0));
        assert_eq!(Path::trivial(4).truncate(0).unwrap(), Path::trivial(4));
        assert!(p.truncate(4).is_err());
        assert_eq!(p.tail(1).unwrap().vertices(), &[1, 2, 3]);
        assert_eq!(p.tail(3).unwrap(), Path::trivial(3));
        assert_eq!(p.tail(0).unwrap(), p);
        assert!(p.tail(4).is_err());
    }

    #[test]
    fn conjunction() {
        let g = line(3);
        let a = Path::from_vertices(&g, &[0, 1]).unwrap();
        let b = Path::from_vertices(&g, &[1, 2]).unwrap();
        assert_eq!(a.conjunction(&b).unwrap().vertices(), &[0, 1, 2]);
        assert_eq!(Path::trivial(1).conjunction(&b).unwrap(), b);
        let c = Path::from_vertices(&g, &[2, 3]).unwrap();
        assert!(a.conjunction(&c).is_err());
    }

    #[test]
    fn validation() {
        let g = line(2);
        assert!(Path::from_vertices(&g, &[0, 2]).is_err());
        assert!(Path::new(&g, 1, vec![0]).is_err());
        assert!(Path::from_vertices(&g, &[]).is_err());
    }

    #[test]
    fn loop_erasure() {
        let g = DirectedGraph::from_edges(None, &[(0, 1), (1, 2), (2, 1), (1, 3)], false).unwrap();
        let p = Path::from_vertices(&g, &[0, 1, 2, 1, 3]).unwrap();
        assert!(!p.is_self_avoiding());
        let le = p.loop_erased();
        assert_eq!(le.vertices(), &[0, 1, 3]);
        assert!(le.is_self_avoiding());
        assert_eq!(le.edges(), &[0, 3]);
    }
}
