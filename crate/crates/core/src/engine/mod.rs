//! Monte Carlo engine: configuration samplers, cluster exploration and estimators.
//!
//! Every replication reads its randomness from a [`ReplicationStream`], so an
//! edge's state is a pure function of `(seed, replication, edge)`. The eager
//! sampler and the lazy explorer therefore produce the same configuration.

mod estimate;
mod explore;
mod sample;

pub use estimate::{
    boundary_survival_sweep, estimate_event, estimate_expected_cluster_size, normal_quantile, EstimateWithCI,
    SweepPoint,
};
pub use explore::{ClusterStats, Explorer};
pub use sample::{reach_cluster, sample_bond, sample_configuration, sample_site, EdgeConfiguration};

use thiserror::Error;

use crate::graph::{DirectedGraph, EdgeId, VertexId};
use crate::rational::{self, Rational};
use crate::stochastics::kernel::{uniform_grid, KernelError};
use crate::stochastics::{Kernel, LawError, LawMap, ReplicationStream, WeightLaw, WeightPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("{0}")]
    Graph(String),
    #[error("{0}")]
    Path(String),
}

/// The three percolation models.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    /// Vertex weights drawn from `laws`; edge `uv` open with probability `κ(W_u W̄_v)`.
    Weighted { laws: LawMap, kernel: Kernel },
    /// Edges independently open with probability `p`.
    Bond { p: f64 },
    /// Vertices independently open with probability `p`; an edge is open iff
    /// both endpoints are. Sampled as the weighted model with the two-point law.
    Site { p: f64 },
}

impl ModelSpec {
    pub fn weighted(law: WeightLaw, kernel: Kernel) -> Self {
        ModelSpec::Weighted { laws: LawMap::uniform(law), kernel }
    }

    pub fn describe(&self) -> String {
        match self {
            ModelSpec::Weighted { laws, kernel } => {
                let extra = if laws.is_identical() { String::new() } else { format!(" +{} overrides", laws.overrides().len()) };
                format!("weighted[{}; {}{}]", laws.default_law(), kernel.name(), extra)
            }
            ModelSpec::Bond { p } => format!("bond[p={p}]"),
            ModelSpec::Site { p } => format!("site[p={p}]"),
        }
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Bond { p: f64 },
    Weighted { laws: LawMap, kernel: Kernel },
}

/// A validated model ready for sampling.
#[derive(Debug, Clone)]
pub struct Model {
    inner: Inner,
}

fn check_p(p: f64) -> Result<(), EngineError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(EngineError::InvalidParameter(format!("p = {p} outside [0, 1]")))
    }
}

/// Checks that the kernel yields probabilities for every weight pair the laws can produce.
fn check_kernel_range(laws: &[&WeightLaw], kernel: &Kernel) -> Result<(), KernelError> {
    let finite = laws.iter().all(|l| l.atoms().is_some());
    let zs: Vec<f64> = if finite {
        let ws: Vec<f64> = laws.iter().flat_map(|l| l.atoms().unwrap()).map(|a| rational::to_f64(&a.pair.w)).collect();
        let wbs: Vec<f64> =
            laws.iter().flat_map(|l| l.atoms().unwrap()).map(|a| rational::to_f64(&a.pair.w_bar)).collect();
        ws.iter().flat_map(|w| wbs.iter().map(move |wb| w * wb)).collect()
    } else {
        let hi = laws
            .iter()
            .map(|l| {
                let s = l.support();
                s.w.1 * s.w_bar.1
            })
            .fold(0.0, f64::max);
        uniform_grid(hi, 1001)
    };
    for z in zs {
        let v = kernel.eval_z(z);
        if !(0.0..=1.0).contains(&v) {
            return Err(KernelError::Range { kernel: kernel.name(), z, value: v });
        }
    }
    Ok(())
}

impl Model {
    pub fn new(spec: &ModelSpec) -> Result<Self, EngineError> {
        let inner = match spec {
            ModelSpec::Bond { p } => {
                check_p(*p)?;
                Inner::Bond { p: *p }
            }
            ModelSpec::Site { p } => {
                check_p(*p)?;
                let exact = rational::from_f64(*p).expect("finite p");
                Inner::Weighted { laws: LawMap::uniform(WeightLaw::site(&exact)?), kernel: Kernel::Product }
            }
            ModelSpec::Weighted { laws, kernel } => {
                let mut all: Vec<&WeightLaw> = vec![laws.default_law()];
                all.extend(laws.overrides().values());
                check_kernel_range(&all, kernel)?;
                Inner::Weighted { laws: laws.clone(), kernel: kernel.clone() }
            }
        };
        Ok(Self { inner })
    }

    pub fn bond(p: f64) -> Result<Self, EngineError> {
        Self::new(&ModelSpec::Bond { p })
    }

    pub fn site(p: f64) -> Result<Self, EngineError> {
        Self::new(&ModelSpec::Site { p })
    }

    /// Site percolation with an exact parameter.
    pub fn site_exact(p: &Rational) -> Result<Self, EngineError> {
        Ok(Self { inner: Inner::Weighted { laws: LawMap::uniform(WeightLaw::site(p)?), kernel: Kernel::Product } })
    }

    pub fn weighted(laws: LawMap, kernel: Kernel) -> Result<Self, EngineError> {
        Self::new(&ModelSpec::Weighted { laws, kernel })
    }

    pub fn is_bond(&self) -> bool {
        matches!(self.inner, Inner::Bond { .. })
    }

    /// True when every edge state is fixed: bond with `p` in `{0, 1}`, or point
    /// masses whose kernel values are all `0` or `1`.
    pub fn is_deterministic(&self) -> bool {
        let certain = |q: f64| q == 0.0 || q == 1.0;
        match &self.inner {
            Inner::Bond { p } => certain(*p),
            Inner::Weighted { laws, kernel } => {
                let mut all: Vec<&WeightLaw> = vec![laws.default_law()];
                all.extend(laws.overrides().values());
                let points: Option<Vec<WeightPair>> = all
                    .iter()
                    .map(|l| match l {
                        WeightLaw::PointMass(p) => Some(p.to_f64()),
                        _ => None,
                    })
                    .collect();
                points.is_some_and(|ps| {
                    ps.iter().all(|a| ps.iter().all(|b| certain(kernel.eval_z(a.w * b.w_bar))))
                })
            }
        }
    }

    /// Weights of vertex `v` in the replication; `None` for the bond model.
    #[inline]
    pub fn weight(&self, stream: &ReplicationStream, v: VertexId) -> Option<WeightPair> {
        match &self.inner {
            Inner::Bond { .. } => None,
            Inner::Weighted { laws, .. } => Some(laws.law_for(v).sample(&mut stream.vertex_rng(v))),
        }
    }

    /// Opening probability of an edge given the tail's infectivity and the head's susceptibility.
    #[inline]
    pub fn edge_probability(&self, w_tail: f64, w_bar_head: f64) -> f64 {
        match &self.inner {
            Inner::Bond { p } => *p,
            Inner::Weighted { kernel, .. } => kernel.eval_z(w_tail * w_bar_head),
        }
    }

    /// State of edge `e` in the replication, computed from scratch.
    pub fn edge_open(&self, graph: &DirectedGraph, stream: &ReplicationStream, e: EdgeId) -> bool {
        let q = match &self.inner {
            Inner::Bond { p } => *p,
            Inner::Weighted { .. } => {
                let edge = graph.edge(e);
                let wu = self.weight(stream, edge.tail).expect("weighted");
                let wv = self.weight(stream, edge.head).expect("weighted");
                self.edge_probability(wu.w, wv.w_bar)
            }
        };
        stream.edge_uniform(e) < q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn model_validation() {
        assert!(Model::bond(1.5).is_err());
        assert!(Model::site(-0.1).is_err());
        let big = WeightLaw::point_mass(int(2), int(1)).unwrap();
        assert!(matches!(
            Model::weighted(LawMap::uniform(big.clone()), Kernel::Product),
            Err(EngineError::Kernel(_))
        ));
        assert!(Model::weighted(LawMap::uniform(big), Kernel::exponential(1.0).unwrap()).is_ok());
        let u = WeightLaw::identical_uniform(0.0).unwrap();
        assert!(Model::weighted(LawMap::uniform(u.clone()), Kernel::custom("twice", |z| 2.0 * z)).is_err());
        assert!(Model::weighted(LawMap::uniform(u), Kernel::Product).is_ok());
    }
}
