use std::collections::VecDeque;

use super::{ClusterStats, EngineError, Model};
use crate::graph::{DirectedGraph, EdgeId, VertexId};
use crate::stochastics::{ReplicationStream, WeightPair};

/// Open/closed state of every edge, optionally with the weights that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeConfiguration {
    open: Vec<bool>,
    weights: Option<Vec<WeightPair>>,
}

impl EdgeConfiguration {
    pub fn from_states(open: Vec<bool>) -> Self {
        Self { open, weights: None }
    }

    #[inline]
    pub fn is_open(&self, e: EdgeId) -> bool {
        self.open[e]
    }

    pub fn states(&self) -> &[bool] {
        &self.open
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn weights(&self) -> Option<&[WeightPair]> {
        self.weights.as_deref()
    }
}

/// Draws all vertex weights, then every edge from its own uniform.
pub fn sample_configuration(
    graph: &DirectedGraph,
    model: &Model,
    stream: &ReplicationStream,
    retain_weights: bool,
) -> Result<EdgeConfiguration, EngineError> {
    let weights: Option<Vec<WeightPair>> = if model.is_bond() {
        None
    } else {
        Some((0..graph.vertex_count()).map(|v| model.weight(stream, v).expect("weighted")).collect())
    };
    let mut open = Vec::with_capacity(graph.edge_count());
    for (e, edge) in graph.edges().iter().enumerate() {
        let q = match &weights {
            None => model.edge_probability(0.0, 0.0),
            Some(w) => model.edge_probability(w[edge.tail].w, w[edge.head].w_bar),
        };
        if !(0.0..=1.0).contains(&q) {
            return Err(EngineError::InvalidParameter(format!("edge {e} has opening probability {q}")));
        }
        open.push(stream.edge_uniform(e) < q);
    }
    Ok(EdgeConfiguration { open, weights: if retain_weights { weights } else { None } })
}

pub fn sample_bond(graph: &DirectedGraph, p: f64, stream: &ReplicationStream) -> Result<EdgeConfiguration, EngineError> {
    sample_configuration(graph, &Model::bond(p)?, stream, false)
}

pub fn sample_site(graph: &DirectedGraph, p: f64, stream: &ReplicationStream) -> Result<EdgeConfiguration, EngineError> {
    sample_configuration(graph, &Model::site(p)?, stream, false)
}

/// Breadth-first cluster of `source` over open edges.
pub fn reach_cluster(
    graph: &DirectedGraph,
    config: &EdgeConfiguration,
    source: VertexId,
    boundary: &[VertexId],
) -> ClusterStats {
    let mut on_boundary = vec![false; graph.vertex_count()];
    for &b in boundary {
        on_boundary[b] = true;
    }
    let mut dist = vec![u32::MAX; graph.vertex_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    let mut stats = ClusterStats { size: 1, reached_boundary: on_boundary[source], frontier_distance: 0 };
    while let Some(v) = queue.pop_front() {
        for &e in graph.out_edges(v) {
            let h = graph.edge(e).head;
            if dist[h] == u32::MAX && config.is_open(e) {
                dist[h] = dist[v] + 1;
                stats.size += 1;
                stats.frontier_distance = stats.frontier_distance.max(dist[h]);
                stats.reached_boundary |= on_boundary[h];
                queue.push_back(h);
            }
        }
    }
    stats
}
