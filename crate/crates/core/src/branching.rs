//! Galton–Watson bounds on rooted trees with `κ = xy`.
//!
//! A reached vertex first accepts the infection (probability `W̄`) and then
//! infects each of its `d` children independently (probability `W`), so
//! `p_0 = E(1 − W̄) + E(W̄ (1 − W)^d)` and `p_j = E(W̄ C(d, j) W^j (1 − W)^{d−j})`.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::engine::{estimate_event, EngineError, EstimateWithCI, Model};
use crate::graph::DirectedGraph;
use crate::paths::PathCollection;
use crate::rational::{self, int, Rational};
use crate::stochastics::{Kernel, LawMap, WeightLaw};

pub const MAX_ITERATIONS: u64 = 100_000;
pub const RESIDUAL_TOL: f64 = 1e-14;
/// Largest tree simulated by [`compare_tree_mc`].
pub const MAX_TREE_VERTICES: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchingError {
    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),
    #[error("fixed-point iteration did not converge (residual {residual:e} after {iterations} steps)")]
    NonConvergence { residual: f64, iterations: u64 },
    #[error("tree too large: {vertices} vertices (cap {cap})")]
    TreeTooLarge { vertices: f64, cap: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Graph(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffspringLaw {
    pub d: usize,
    /// `probs[j] = P(j offspring)` for `j = 0..=d`.
    pub probs: Vec<Rational>,
    pub mean: Rational,
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut c = Rational::one();
    for i in 0..k {
        c = c * int((n - i) as i64) / int((i + 1) as i64);
    }
    c
}

impl OffspringLaw {
    /// Offspring law with the given probabilities of `0, 1, …, d` children.
    pub fn from_probabilities(probs: Vec<Rational>) -> Result<Self, BranchingError> {
        if probs.is_empty() || probs.iter().any(|p| !rational::is_probability(p)) {
            return Err(BranchingError::InvalidLaw("probabilities must lie in [0, 1]".into()));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(BranchingError::InvalidLaw(format!("probabilities sum to {}", rational::render(&total))));
        }
        let mean = probs.iter().enumerate().map(|(j, p)| p * int(j as i64)).sum();
        Ok(Self { d: probs.len() - 1, probs, mean })
    }

    /// `f(s) = Σ p_j s^j`.
    pub fn pgf(&self, s: f64) -> f64 {
        self.probs.iter().rev().fold(0.0, |acc, p| acc * s + rational::to_f64(p))
    }

    pub fn mean_f64(&self) -> f64 {
        rational::to_f64(&self.mean)
    }
}

/// Offspring law of a tree vertex with out-degree `d` under `κ = xy`.
pub fn offspring_law(law: &WeightLaw, d: usize) -> Result<OffspringLaw, BranchingError> {
    let atoms = law.atoms().ok_or_else(|| BranchingError::InvalidLaw("law must have finite support".into()))?;
    if !law.support().within_unit_square() {
        return Err(BranchingError::InvalidLaw("weights must lie in [0, 1]^2".into()));
    }
    let mut probs = vec![Rational::zero(); d + 1];
    for a in &atoms {
        let (w, wb) = (&a.pair.w, &a.pair.w_bar);
        probs[0] += &a.prob * (Rational::one() - wb);
        for (j, slot) in probs.iter_mut().enumerate() {
            let mut term = &a.prob * wb * binomial(d, j);
            for _ in 0..j {
                term *= w;
            }
            for _ in j..d {
                term *= Rational::one() - w;
            }
            *slot += term;
        }
    }
    let out = OffspringLaw::from_probabilities(probs)?;
    let e_wwbar = law.exact_moments().expect("finite law").e_wwbar;
    debug_assert_eq!(out.mean, int(d as i64) * e_wwbar, "offspring mean identity");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GwResult {
    /// Smallest fixed point of the pgf in `[0, 1]`.
    pub extinction: f64,
    pub iterations: u64,
    pub residual: f64,
}

impl GwResult {
    pub fn survival(&self) -> f64 {
        1.0 - self.extinction
    }
}

/// Extinction probability by iterating `s ← f(s)` from `s = 0`.
pub fn gw_extinction(offspring: &OffspringLaw) -> Result<GwResult, BranchingError> {
    let p1_is_one = offspring.probs.get(1).is_some_and(|p| p.is_one());
    if p1_is_one {
        return Ok(GwResult { extinction: 0.0, iterations: 0, residual: 0.0 });
    }
    if offspring.mean <= Rational::one() {
        return Ok(GwResult { extinction: 1.0, iterations: 0, residual: 0.0 });
    }
    let mut s = 0.0;
    let mut residual = f64::INFINITY;
    for i in 1..=MAX_ITERATIONS {
        let next = offspring.pgf(s);
        residual = (next - s).abs();
        s = next;
        if residual < RESIDUAL_TOL {
            return Ok(GwResult { extinction: s, iterations: i, residual });
        }
    }
    Err(BranchingError::NonConvergence { residual, iterations: MAX_ITERATIONS })
}

/// `P(Z_k > 0) = 1 − f^{(k)}(0)`.
pub fn gw_generation_survival(offspring: &OffspringLaw, k: u32) -> f64 {
    let mut s = 0.0;
    for _ in 0..k {
        s = offspring.pgf(s);
    }
    1.0 - s
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeComparison {
    pub d: usize,
    pub k: u32,
    pub offspring: OffspringLaw,
    /// `1 − f^{(k−1)}(0)`.
    pub gw_value: f64,
    /// Root infectivity and generation-`k` susceptibilities forced to 1: the
    /// root infects its first child, which reaches generation `k`.
    pub conditioned: EstimateWithCI,
    /// Unforced weights: the root reaches generation `k`.
    pub unconditioned: EstimateWithCI,
    /// `|conditioned − gw_value|` in units of the binomial standard deviation at `gw_value`.
    pub z_score: f64,
}

impl TreeComparison {
    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score <= sigmas
    }
}

/// Simulates the tree of out-degree `d` and depth `k` and compares with the
/// Galton–Watson survival of generation `k − 1`.
pub fn compare_tree_mc(
    law: &WeightLaw,
    d: usize,
    k: u32,
    replications: u64,
    confidence: f64,
    seed: u64,
) -> Result<TreeComparison, BranchingError> {
    if k == 0 || d == 0 {
        return Err(BranchingError::InvalidLaw("tree comparison needs d >= 1 and k >= 1".into()));
    }
    let vertices: f64 = (0..=k).map(|g| (d as f64).powi(g as i32)).sum();
    if vertices > MAX_TREE_VERTICES as f64 {
        return Err(BranchingError::TreeTooLarge { vertices, cap: MAX_TREE_VERTICES });
    }
    let offspring = offspring_law(law, d)?;
    let gw_value = gw_generation_survival(&offspring, k - 1);

    let tree = DirectedGraph::rooted_tree(d, k).map_err(|e| BranchingError::Graph(e.to_string()))?;
    let root = 0;
    let first_child = tree.edge(tree.out_edges(root)[0]).head;
    let leaves = tree.generation(k);
    let below_first = tree.reachable_from(first_child, |_| true);
    let targets: Vec<usize> = leaves.iter().copied().filter(|&v| below_first[v]).collect();

    let unit = WeightLaw::point_mass(int(1), int(1)).expect("point mass");
    let mut forced = LawMap::uniform(law.clone()).with_override(root, unit.clone());
    for &v in &leaves {
        forced.set(v, unit.clone());
    }
    let path_err = |e: crate::paths::PathError| EngineError::Path(e.to_string());
    let conditioned = estimate_event(
        &tree,
        &Model::weighted(forced, Kernel::Product)?,
        &PathCollection::boundary_reaching(&tree, root, targets).map_err(path_err)?,
        replications,
        confidence,
        seed,
    )?;
    let unconditioned = estimate_event(
        &tree,
        &Model::weighted(LawMap::uniform(law.clone()), Kernel::Product)?,
        &PathCollection::boundary_reaching(&tree, root, leaves).map_err(path_err)?,
        replications,
        confidence,
        seed,
    )?;
    let sigma = (gw_value * (1.0 - gw_value) / replications as f64).sqrt();
    let diff = (conditioned.estimate - gw_value).abs();
    let z_score = if sigma > 0.0 { diff / sigma } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(TreeComparison { d, k, offspring, gw_value, conditioned, unconditioned, z_score })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use crate::stochastics::Marginal;

    #[test]
    fn offspring_examples() {
        let o = offspring_law(&WeightLaw::point_mass(int(1), int(1)).unwrap(), 2).unwrap();
        assert_eq!(o.probs, vec![int(0), int(0), int(1)]);
        assert_eq!(o.mean, int(2));
        let q = frac(3, 4);
        let o = offspring_law(&WeightLaw::site(&q).unwrap(), 2).unwrap();
        assert_eq!(o.probs, vec![frac(1, 4), int(0), frac(3, 4)]);
        assert_eq!(o.mean, frac(3, 2));
        let half = Marginal::discrete(vec![(int(0), frac(1, 2)), (int(1), frac(1, 2))]).unwrap();
        let o = offspring_law(&WeightLaw::product(half.clone(), half), 1).unwrap();
        assert_eq!(o.probs, vec![frac(3, 4), frac(1, 4)]);
        assert!(offspring_law(&WeightLaw::point_mass(int(2), int(1)).unwrap(), 2).is_err());
    }

    #[test]
    fn extinction() {
        let o = OffspringLaw::from_probabilities(vec![frac(1, 4), int(0), frac(3, 4)]).unwrap();
        let r = gw_extinction(&o).unwrap();
        assert!((r.extinction - 1.0 / 3.0).abs() < 1e-12);
        assert!((gw_generation_survival(&o, 200) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(gw_generation_survival(&o, 0), 1.0);
        assert_eq!(gw_generation_survival(&o, 1), 0.75);
        let sub = OffspringLaw::from_probabilities(vec![frac(1, 2), int(0), frac(1, 2)]).unwrap();
        assert_eq!(gw_extinction(&sub).unwrap().extinction, 1.0);
        let sure = OffspringLaw::from_probabilities(vec![int(0), int(0), int(0), int(1)]).unwrap();
        assert_eq!(gw_extinction(&sure).unwrap().extinction, 0.0);
        let one = OffspringLaw::from_probabilities(vec![int(0), int(1)]).unwrap();
        assert_eq!(gw_extinction(&one).unwrap().extinction, 0.0);
        assert!(OffspringLaw::from_probabilities(vec![frac(1, 2), frac(1, 4)]).is_err());
    }

    #[test]
    fn tree_point_mass() {
        let unit = WeightLaw::point_mass(int(1), int(1)).unwrap();
        let c = compare_tree_mc(&unit, 2, 3, 200, 0.95, 1).unwrap();
        assert_eq!((c.gw_value, c.conditioned.estimate, c.unconditioned.estimate), (1.0, 1.0, 1.0));
        assert!(c.within(3.0));
    }
}
