use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{EngineError, Explorer, Model};
use crate::graph::{Boundary, DirectedGraph, VertexId};
use crate::paths::PathCollection;
use crate::stochastics::{Kernel, LawMap, ReplicationStream, WeightLaw};

/// Smallest replication count the estimators accept.
pub const MIN_REPLICATIONS: u64 = 100;

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub half_width: f64,
    /// Plug-in standard error of the estimate.
    pub std_error: f64,
    pub confidence: f64,
    pub replications: u64,
    pub seed: u64,
}

impl EstimateWithCI {
    /// Proportion with a Wilson score interval.
    pub fn wilson(successes: u64, n: u64, confidence: f64, seed: u64) -> Self {
        let nf = n as f64;
        let p = successes as f64 / nf;
        let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
        let z2 = z * z;
        let denom = 1.0 + z2 / nf;
        let centre = (p + z2 / (2.0 * nf)) / denom;
        let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        let (lo, hi) = ((centre - half).max(0.0), (centre + half).min(1.0));
        // Guard against rounding at the extremes.
        let (lo, hi) = (lo.min(p), hi.max(p));
        Self {
            estimate: p,
            ci_low: lo,
            ci_high: hi,
            half_width: 0.5 * (hi - lo),
            std_error: (p * (1.0 - p) / nf).sqrt(),
            confidence,
            replications: n,
            seed,
        }
    }

    /// Sample mean of nonnegative integers with a normal interval, from exact sums.
    pub fn mean_of_counts(sum: u64, sum_sq: u128, n: u64, confidence: f64, seed: u64) -> Self {
        let nf = n as f64;
        let mean = sum as f64 / nf;
        let centred = sum_sq as f64 - (sum as f64) * (sum as f64) / nf;
        let var = if n > 1 { (centred / (nf - 1.0)).max(0.0) } else { 0.0 };
        let se = (var / nf).sqrt();
        let half = normal_quantile(1.0 - (1.0 - confidence) / 2.0) * se;
        Self {
            estimate: mean,
            ci_low: mean - half,
            ci_high: mean + half,
            half_width: half,
            std_error: se,
            confidence,
            replications: n,
            seed,
        }
    }

    /// The same estimate with a zero-width interval.
    pub fn exact(self) -> Self {
        Self { ci_low: self.estimate, ci_high: self.estimate, half_width: 0.0, std_error: 0.0, ..self }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

fn check_run(replications: u64, confidence: f64) -> Result<(), EngineError> {
    if replications < MIN_REPLICATIONS {
        return Err(EngineError::InvalidParameter(format!(
            "at least {MIN_REPLICATIONS} replications are required, got {replications}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(EngineError::InvalidParameter(format!("confidence level {confidence} outside (0, 1)")));
    }
    Ok(())
}

/// Monte Carlo estimate of `P(C^Ξ)`.
pub fn estimate_event(
    graph: &DirectedGraph,
    model: &Model,
    collection: &PathCollection,
    replications: u64,
    confidence: f64,
    seed: u64,
) -> Result<EstimateWithCI, EngineError> {
    check_run(replications, confidence)?;
    let hits = match collection.search_target(graph) {
        Some((source, targets)) => (0..replications)
            .into_par_iter()
            .map_init(
                || Explorer::new(graph.vertex_count()),
                |ex, r| ex.reaches(graph, model, &ReplicationStream::new(seed, r), source, &targets),
            )
            .filter(|&hit| hit)
            .count(),
        None => (0..replications)
            .into_par_iter()
            .filter(|&r| {
                let stream = ReplicationStream::new(seed, r);
                collection.holds(graph, |e| model.edge_open(graph, &stream, e))
            })
            .count(),
    };
    let estimate = EstimateWithCI::wilson(hits as u64, replications, confidence, seed);
    // Without randomness the indicator is constant and the interval collapses.
    Ok(if model.is_deterministic() { estimate.exact() } else { estimate })
}

/// Monte Carlo estimate of `E|C_u|`.
pub fn estimate_expected_cluster_size(
    graph: &DirectedGraph,
    model: &Model,
    source: VertexId,
    replications: u64,
    confidence: f64,
    seed: u64,
) -> Result<EstimateWithCI, EngineError> {
    check_run(replications, confidence)?;
    if source >= graph.vertex_count() {
        return Err(EngineError::InvalidParameter(format!("source {source} is not in the graph")));
    }
    let none = vec![false; graph.vertex_count()];
    let (sum, sum_sq) = (0..replications)
        .into_par_iter()
        .map_init(
            || Explorer::new(graph.vertex_count()),
            |ex, r| {
                let s = ex.cluster(graph, model, &ReplicationStream::new(seed, r), source, &none).size as u64;
                (s, (s as u128) * (s as u128))
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(EstimateWithCI::mean_of_counts(sum, sum_sq, replications, confidence, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub side: usize,
    pub estimate: EstimateWithCI,
}

/// For each side length `L`, the probability that the centre of the `L × L`
/// box reaches the box frame under the weighted model.
pub fn boundary_survival_sweep(
    law: &WeightLaw,
    kernel: &Kernel,
    sides: &[usize],
    replications: u64,
    confidence: f64,
    seed: u64,
) -> Result<Vec<SweepPoint>, EngineError> {
    if sides.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EngineError::InvalidParameter("side lengths must be increasing".into()));
    }
    let model = Model::weighted(LawMap::uniform(law.clone()), kernel.clone())?;
    sides
        .iter()
        .map(|&side| {
            let graph = DirectedGraph::square_lattice(side, Boundary::Box).map_err(|e| EngineError::Graph(e.to_string()))?;
            let collection = PathCollection::boundary_reaching(&graph, graph.origin().expect("lattice origin"), graph.box_boundary())
                .map_err(|e| EngineError::Path(e.to_string()))?;
            let estimate = estimate_event(&graph, &model, &collection, replications, confidence, seed)?;
            Ok(SweepPoint { side, estimate })
        })
        .collect()
}
