use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use serde::Serialize;

use super::{Path, PathError};
use crate::graph::{DirectedGraph, EdgeId, VertexId};

/// Default cap on explicitly listed paths.
pub const DEFAULT_PATH_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// An explicit finite list that passed the weak-hoppability check. Finite
    /// collections are then hoppable, since `Ξ_n = Ξ` for large `n`.
    CheckedWeaklyHoppable,
    /// All paths between two vertices, or all boundary-reaching paths.
    CanonicalHoppable,
    Unverified,
}

impl Certificate {
    pub fn is_hoppable(self) -> bool {
        !matches!(self, Certificate::Unverified)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CollectionKind {
    Explicit(Vec<Path>),
    /// Every path from `source` to `target`, loops included.
    AllPathsBetween { source: VertexId, target: VertexId },
    /// Every path from `source` ending in the boundary set: the finite
    /// stand-in for infinite paths.
    BoundaryReaching { source: VertexId, boundary: Vec<VertexId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCollection {
    kind: CollectionKind,
    certificate: Certificate,
}

/// A crossing of two paths whose splice is missing from the collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoppabilityWitness {
    /// Index of the path supplying the head `ξ^s(i)`.
    pub xi: usize,
    /// Index of the path supplying the tail.
    pub phi: usize,
    pub vertex: VertexId,
    pub missing: Path,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoppabilityReport {
    pub weakly_hoppable: bool,
    pub witness: Option<HoppabilityWitness>,
}

impl PathCollection {
    /// Explicit collection; duplicates are dropped, order otherwise kept.
    pub fn explicit(paths: Vec<Path>) -> Result<Self, PathError> {
        Self::explicit_with_cap(paths, DEFAULT_PATH_CAP)
    }

    pub fn explicit_with_cap(paths: Vec<Path>, cap: usize) -> Result<Self, PathError> {
        let mut seen = HashSet::new();
        let paths: Vec<Path> = paths.into_iter().filter(|p| seen.insert(p.clone())).collect();
        if paths.len() > cap {
            return Err(PathError::TooManyPaths { cap });
        }
        Ok(Self { kind: CollectionKind::Explicit(paths), certificate: Certificate::Unverified })
    }

    /// Explicit collection whose certificate reflects the weak-hoppability check.
    pub fn explicit_checked(paths: Vec<Path>) -> Result<(Self, HoppabilityReport), PathError> {
        let mut c = Self::explicit(paths)?;
        let report = c.check_weakly_hoppable();
        if report.weakly_hoppable {
            c.certificate = Certificate::CheckedWeaklyHoppable;
        }
        Ok((c, report))
    }

    pub fn all_paths_between(graph: &DirectedGraph, source: VertexId, target: VertexId) -> Result<Self, PathError> {
        check_vertex(graph, source)?;
        check_vertex(graph, target)?;
        Ok(Self { kind: CollectionKind::AllPathsBetween { source, target }, certificate: Certificate::CanonicalHoppable })
    }

    pub fn boundary_reaching(graph: &DirectedGraph, source: VertexId, boundary: Vec<VertexId>) -> Result<Self, PathError> {
        check_vertex(graph, source)?;
        for &b in &boundary {
            check_vertex(graph, b)?;
        }
        let mut boundary = boundary;
        boundary.sort_unstable();
        boundary.dedup();
        Ok(Self {
            kind: CollectionKind::BoundaryReaching { source, boundary },
            certificate: Certificate::CanonicalHoppable,
        })
    }

    /// Reads one path per line as whitespace-separated vertex ids; `#` starts a comment.
    pub fn read_explicit<R: BufRead>(graph: &DirectedGraph, reader: R) -> Result<Self, PathError> {
        let mut paths = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| PathError::Io(e.to_string()))?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let vertices = body
                .split_whitespace()
                .map(|t| t.parse::<VertexId>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| PathError::Parse { line: i + 1, reason: e.to_string() })?;
            let path = Path::from_vertices(graph, &vertices)
                .map_err(|e| PathError::Parse { line: i + 1, reason: e.to_string() })?;
            paths.push(path);
        }
        Self::explicit(paths)
    }

    pub fn kind(&self) -> &CollectionKind {
        &self.kind
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn is_canonical(&self) -> bool {
        !matches!(self.kind, CollectionKind::Explicit(_))
    }

    /// Weak-hoppability check of an explicit collection. Canonical collections
    /// are hoppable by construction and report so without checking.
    ///
    /// For every ordered pair `(ξ, φ)`, including `ξ = φ`, and every vertex `v`
    /// that ends the `i`-th edge of `ξ` and starts an edge of `φ`, the splice of
    /// the first `i` edges of `ξ` with the rest of `φ` from `v` must be listed.
    pub fn check_weakly_hoppable(&self) -> HoppabilityReport {
        let CollectionKind::Explicit(paths) = &self.kind else {
            return HoppabilityReport { weakly_hoppable: true, witness: None };
        };
        let members: HashSet<&[EdgeId]> = paths.iter().filter(|p| !p.is_trivial()).map(|p| p.edges()).collect();
        let mut starts: HashMap<VertexId, Vec<(usize, usize)>> = HashMap::new();
        for (k, p) in paths.iter().enumerate() {
            for j in 0..p.len() {
                starts.entry(p.vertices()[j]).or_default().push((k, j));
            }
        }
        for (xi, p) in paths.iter().enumerate() {
            for i in 1..=p.len() {
                let v = p.vertices()[i];
                let Some(crossings) = starts.get(&v) else { continue };
                for &(phi, j) in crossings {
                    let q = &paths[phi];
                    let spliced = p.splice(i, q, j);
                    if !members.contains(spliced.edges()) {
                        return HoppabilityReport {
                            weakly_hoppable: false,
                            witness: Some(HoppabilityWitness { xi, phi, vertex: v, missing: spliced }),
                        };
                    }
                }
            }
        }
        HoppabilityReport { weakly_hoppable: true, witness: None }
    }

    /// Whether some path of the collection is open.
    pub fn holds<F: Fn(EdgeId) -> bool>(&self, graph: &DirectedGraph, open: F) -> bool {
        match &self.kind {
            CollectionKind::Explicit(paths) => paths.iter().any(|p| p.is_open(&open)),
            CollectionKind::AllPathsBetween { source, target } => reaches(graph, *source, |v| v == *target, open),
            CollectionKind::BoundaryReaching { source, boundary } => {
                let mask = membership(graph, boundary);
                reaches(graph, *source, |v| mask[v], open)
            }
        }
    }

    /// Source and target mask for canonical collections, whose event is
    /// "the source reaches a target over open edges".
    pub fn search_target(&self, graph: &DirectedGraph) -> Option<(VertexId, Vec<bool>)> {
        Some((self.source()?, self.targets(graph)))
    }

    /// Vertices where an open path from the source completes the event.
    fn targets(&self, graph: &DirectedGraph) -> Vec<bool> {
        match &self.kind {
            CollectionKind::AllPathsBetween { target, .. } => membership(graph, &[*target]),
            CollectionKind::BoundaryReaching { boundary, .. } => membership(graph, boundary),
            CollectionKind::Explicit(_) => unreachable!("explicit collections have no target set"),
        }
    }

    fn source(&self) -> Option<VertexId> {
        match &self.kind {
            CollectionKind::AllPathsBetween { source, .. } | CollectionKind::BoundaryReaching { source, .. } => {
                Some(*source)
            }
            CollectionKind::Explicit(_) => None,
        }
    }

    /// Targets of the `n`-th approximation of a canonical collection: the
    /// original targets, plus (for boundary-reaching collections) every vertex
    /// where a boundary-reaching path first leaves `E(n)`.
    fn targets_n(&self, graph: &DirectedGraph, n: usize) -> Vec<bool> {
        let mut t = self.targets(graph);
        if let CollectionKind::BoundaryReaching { boundary, .. } = &self.kind {
            let co = graph.co_reachable_to(boundary, |_| true);
            for e in n..graph.edge_count() {
                let edge = graph.edge(e);
                if co[edge.head] {
                    t[edge.tail] = true;
                }
            }
        }
        t
    }

    /// Whether the `n`-th approximation `Ξ_n` has an open path, computed by
    /// search rather than by listing `Ξ_n`.
    pub fn holds_n<F: Fn(EdgeId) -> bool>(&self, graph: &DirectedGraph, n: usize, open: F) -> bool {
        match &self.kind {
            CollectionKind::Explicit(paths) => {
                paths.iter().any(|p| p.edges().iter().all(|&e| e < n && open(e)))
            }
            _ => {
                let t = self.targets_n(graph, n);
                reaches(graph, self.source().expect("canonical"), |v| t[v], |e| e < n && open(e))
            }
        }
    }

    /// The approximation `Ξ_n` against the graph's edge enumeration.
    ///
    /// Explicit collections keep the paths lying inside `E(n)` (trivial paths
    /// always do). Canonical collections are listed by their self-avoiding
    /// members that stop at the first target; these carry the same event and
    /// the result keeps the canonical certificate.
    pub fn build_xi_n(&self, graph: &DirectedGraph, n: usize) -> Result<PathCollection, PathError> {
        if n > graph.edge_count() {
            return Err(PathError::InvalidArgument(format!("n = {n} exceeds the {} edges", graph.edge_count())));
        }
        match &self.kind {
            CollectionKind::Explicit(paths) => Ok(PathCollection {
                kind: CollectionKind::Explicit(
                    paths.iter().filter(|p| p.edges().iter().all(|&e| e < n)).cloned().collect(),
                ),
                certificate: self.certificate,
            }),
            _ => {
                let t = self.targets_n(graph, n);
                let paths = self_avoiding_to_targets(graph, self.source().expect("canonical"), &t, |e| e < n, DEFAULT_PATH_CAP)?;
                Ok(PathCollection { kind: CollectionKind::Explicit(paths), certificate: Certificate::CanonicalHoppable })
            }
        }
    }

    /// Self-avoiding paths whose openness decides the event: the explicit list
    /// after loop erasure, or the minimal self-avoiding paths of a canonical kind.
    pub fn minimal_paths(&self, graph: &DirectedGraph, cap: usize) -> Result<Vec<Path>, PathError> {
        match &self.kind {
            CollectionKind::Explicit(paths) => {
                let mut seen = HashSet::new();
                Ok(paths.iter().map(Path::loop_erased).filter(|p| seen.insert(p.clone())).collect())
            }
            _ => {
                let t = self.targets(graph);
                self_avoiding_to_targets(graph, self.source().expect("canonical"), &t, |_| true, cap)
            }
        }
    }

    /// A set of edges outside of which edge states cannot change the event.
    /// Empty when the event is certain.
    pub fn relevant_edges(&self, graph: &DirectedGraph) -> Vec<EdgeId> {
        match &self.kind {
            CollectionKind::Explicit(paths) => {
                if paths.iter().any(|p| p.is_trivial()) {
                    return Vec::new();
                }
                let mut edges: Vec<EdgeId> = paths.iter().flat_map(|p| p.edges().iter().copied()).collect();
                edges.sort_unstable();
                edges.dedup();
                edges
            }
            _ => {
                let source = self.source().expect("canonical");
                let t = self.targets(graph);
                if t[source] {
                    return Vec::new();
                }
                // Tails reachable from the source without passing a target; heads
                // that can still reach a target.
                let mut fwd = vec![false; graph.vertex_count()];
                fwd[source] = true;
                let mut stack = vec![source];
                while let Some(v) = stack.pop() {
                    if t[v] {
                        continue;
                    }
                    for &e in graph.out_edges(v) {
                        let h = graph.edge(e).head;
                        if !fwd[h] {
                            fwd[h] = true;
                            stack.push(h);
                        }
                    }
                }
                let targets: Vec<VertexId> = (0..graph.vertex_count()).filter(|&v| t[v]).collect();
                let back = graph.co_reachable_to(&targets, |_| true);
                (0..graph.edge_count())
                    .filter(|&e| {
                        let edge = graph.edge(e);
                        fwd[edge.tail] && !t[edge.tail] && edge.head != source && back[edge.head]
                    })
                    .collect()
            }
        }
    }
}

fn check_vertex(graph: &DirectedGraph, v: VertexId) -> Result<(), PathError> {
    if v < graph.vertex_count() {
        Ok(())
    } else {
        Err(PathError::InvalidArgument(format!("vertex {v} is not in the graph")))
    }
}

fn membership(graph: &DirectedGraph, set: &[VertexId]) -> Vec<bool> {
    let mut m = vec![false; graph.vertex_count()];
    for &v in set {
        m[v] = true;
    }
    m
}

fn reaches<T: Fn(VertexId) -> bool, F: Fn(EdgeId) -> bool>(
    graph: &DirectedGraph,
    source: VertexId,
    is_target: T,
    open: F,
) -> bool {
    if is_target(source) {
        return true;
    }
    let mut seen = vec![false; graph.vertex_count()];
    seen[source] = true;
    let mut stack = vec![source];
    while let Some(v) = stack.pop() {
        for &e in graph.out_edges(v) {
            let h = graph.edge(e).head;
            if !seen[h] && open(e) {
                if is_target(h) {
                    return true;
                }
                seen[h] = true;
                stack.push(h);
            }
        }
    }
    false
}

/// Self-avoiding paths from `source` over allowed edges that end at their first target.
fn self_avoiding_to_targets<F: Fn(EdgeId) -> bool>(
    graph: &DirectedGraph,
    source: VertexId,
    targets: &[bool],
    allowed: F,
    cap: usize,
) -> Result<Vec<Path>, PathError> {
    if targets[source] {
        return Ok(vec![Path::trivial(source)]);
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; graph.vertex_count()];
    let mut vertices = vec![source];
    let mut edges = Vec::new();
    on_path[source] = true;
    // Explicit stack of (vertex, next out-edge position).
    let mut stack: Vec<(VertexId, usize)> = vec![(source, 0)];
    while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
        let outs = graph.out_edges(v);
        if *pos == outs.len() {
            stack.pop();
            on_path[v] = false;
            vertices.pop();
            edges.pop();
            continue;
        }
        let e = outs[*pos];
        *pos += 1;
        let h = graph.edge(e).head;
        if on_path[h] || !allowed(e) {
            continue;
        }
        if targets[h] {
            let mut es = edges.clone();
            es.push(e);
            let mut vs = vertices.clone();
            vs.push(h);
            out.push(Path::from_parts(es, vs));
            if out.len() > cap {
                return Err(PathError::TooManyPaths { cap });
            }
            continue;
        }
        on_path[h] = true;
        vertices.push(h);
        edges.push(e);
        stack.push((h, 0));
    }
    Ok(out)
}
