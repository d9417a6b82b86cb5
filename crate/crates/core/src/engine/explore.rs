use serde::Serialize;

use super::{Inner, Model};
use crate::graph::{DirectedGraph, VertexId};
use crate::stochastics::ReplicationStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClusterStats {
    /// `|C_u|`, counting the source.
    pub size: usize,
    pub reached_boundary: bool,
    /// Largest breadth-first distance from the source inside the cluster.
    pub frontier_distance: u32,
}

/// Reusable scratch space for lazily sampled searches.
///
/// Weights are drawn only for vertices the search touches and edge states only
/// for edges it inspects. Because every variate lives at a fixed slot of the
/// replication stream, the result equals a search over the eagerly sampled
/// configuration.
#[derive(Debug, Clone)]
pub struct Explorer {
    epoch: u32,
    weight_epoch: Vec<u32>,
    w: Vec<f64>,
    w_bar: Vec<f64>,
    seen: Vec<u32>,
    dist: Vec<u32>,
    queue: Vec<VertexId>,
}

impl Explorer {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            epoch: 0,
            weight_epoch: vec![0; vertex_count],
            w: vec![0.0; vertex_count],
            w_bar: vec![0.0; vertex_count],
            seen: vec![0; vertex_count],
            dist: vec![0; vertex_count],
            queue: Vec::new(),
        }
    }

    fn begin(&mut self, n: usize) {
        if self.seen.len() < n {
            *self = Self::new(n);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.weight_epoch.iter_mut().for_each(|x| *x = 0);
            self.seen.iter_mut().for_each(|x| *x = 0);
            self.epoch = 1;
        }
        self.queue.clear();
    }

    #[inline]
    fn load(&mut self, model: &Model, stream: &ReplicationStream, v: VertexId) {
        if self.weight_epoch[v] != self.epoch {
            let pair = model.weight(stream, v).expect("weighted model");
            self.w[v] = pair.w;
            self.w_bar[v] = pair.w_bar;
            self.weight_epoch[v] = self.epoch;
        }
    }

    /// Whether the open edge from `v` via edge `e` to `h` is present.
    #[inline]
    fn open(&mut self, model: &Model, stream: &ReplicationStream, e: usize, wu: f64, h: VertexId) -> bool {
        let q = match &model.inner {
            Inner::Bond { p } => *p,
            Inner::Weighted { .. } => {
                self.load(model, stream, h);
                model.edge_probability(wu, self.w_bar[h])
            }
        };
        if q <= 0.0 {
            false
        } else if q >= 1.0 {
            true
        } else {
            stream.edge_uniform(e) < q
        }
    }

    #[inline]
    fn infectivity(&mut self, model: &Model, stream: &ReplicationStream, v: VertexId) -> f64 {
        match &model.inner {
            Inner::Bond { .. } => 1.0,
            Inner::Weighted { .. } => {
                self.load(model, stream, v);
                self.w[v]
            }
        }
    }

    /// Whether `source` reaches a vertex with `targets[v]` over open edges.
    /// Depth-first with early exit.
    pub fn reaches(
        &mut self,
        graph: &DirectedGraph,
        model: &Model,
        stream: &ReplicationStream,
        source: VertexId,
        targets: &[bool],
    ) -> bool {
        if targets[source] {
            return true;
        }
        self.begin(graph.vertex_count());
        let epoch = self.epoch;
        self.seen[source] = epoch;
        self.queue.push(source);
        while let Some(v) = self.queue.pop() {
            let wu = self.infectivity(model, stream, v);
            for &e in graph.out_edges(v) {
                let h = graph.edge(e).head;
                if self.seen[h] == epoch {
                    continue;
                }
                if self.open(model, stream, e, wu, h) {
                    if targets[h] {
                        return true;
                    }
                    self.seen[h] = epoch;
                    self.queue.push(h);
                }
            }
        }
        false
    }

    /// Full breadth-first cluster of `source`.
    pub fn cluster(
        &mut self,
        graph: &DirectedGraph,
        model: &Model,
        stream: &ReplicationStream,
        source: VertexId,
        targets: &[bool],
    ) -> ClusterStats {
        self.begin(graph.vertex_count());
        let epoch = self.epoch;
        self.seen[source] = epoch;
        self.dist[source] = 0;
        self.queue.push(source);
        let mut stats = ClusterStats { size: 1, reached_boundary: targets[source], frontier_distance: 0 };
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            let wu = self.infectivity(model, stream, v);
            for &e in graph.out_edges(v) {
                let h = graph.edge(e).head;
                if self.seen[h] == epoch {
                    continue;
                }
                if self.open(model, stream, e, wu, h) {
                    self.seen[h] = epoch;
                    self.dist[h] = self.dist[v] + 1;
                    stats.size += 1;
                    stats.frontier_distance = stats.frontier_distance.max(self.dist[h]);
                    stats.reached_boundary |= targets[h];
                    self.queue.push(h);
                }
            }
        }
        stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{reach_cluster, sample_configuration};
    use crate::graph::Boundary;
    use crate::rational::frac;
    use crate::stochastics::{Kernel, LawMap, WeightLaw};

    #[test]
    fn lazy_equals_eager() {
        let g = DirectedGraph::square_lattice(15, Boundary::Box).unwrap();
        let boundary = g.box_boundary();
        let mut mask = vec![false; g.vertex_count()];
        boundary.iter().for_each(|&b| mask[b] = true);
        let o = g.origin().unwrap();
        let models = [
            Model::weighted(LawMap::uniform(WeightLaw::identical_uniform(0.4).unwrap()), Kernel::Product).unwrap(),
            Model::weighted(
                LawMap::uniform(
                    WeightLaw::from_triples(&[(frac(0, 1), frac(1, 1), frac(1, 2)), (frac(3, 2), frac(1, 2), frac(1, 2))])
                        .unwrap(),
                ),
                Kernel::exponential(2.0).unwrap(),
            )
            .unwrap(),
            Model::bond(0.55).unwrap(),
            Model::site(0.7).unwrap(),
        ];
        let mut ex = Explorer::new(g.vertex_count());
        for m in &models {
            for r in 0..200 {
                let s = ReplicationStream::new(3, r);
                let c = sample_configuration(&g, m, &s, false).unwrap();
                let eager = reach_cluster(&g, &c, o, &boundary);
                assert_eq!(ex.cluster(&g, m, &s, o, &mask), eager);
                assert_eq!(ex.reaches(&g, m, &s, o, &mask), eager.reached_boundary);
            }
        }
    }
}
