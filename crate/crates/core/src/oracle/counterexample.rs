//! The two-measure counterexample on the origin and its four neighbours.

use num_traits::One;

use super::{compare_zero_functions, exact_event_probability, ExactModel, ExactProbability, OracleError, ZeroComparison};
use crate::graph::DirectedGraph;
use crate::paths::{HoppabilityReport, Path, PathCollection};
use crate::rational::{frac, int, Rational};
use crate::stochastics::{Kernel, LawMap, WeightLaw};

/// The two weight laws at the origin, `(P^a, P^b)`.
pub fn counterexample_laws() -> (WeightLaw, WeightLaw) {
    let fifth = frac(1, 5);
    let a = WeightLaw::from_triples(&[
        (int(0), int(0), frac(3, 5)),
        (frac(1, 2), int(1), fifth.clone()),
        (int(1), frac(1, 2), fifth.clone()),
    ])
    .expect("fixed law");
    let b = WeightLaw::from_triples(&[
        (int(0), frac(1, 2), fifth.clone()),
        (int(0), int(1), fifth.clone()),
        (frac(1, 2), int(0), fifth.clone()),
        (int(1), int(0), fifth.clone()),
        (int(1), int(1), fifth),
    ])
    .expect("fixed law");
    (a, b)
}

/// `{(0,−1) → O → (0,1), (−1,0) → O → (1,0)}`, without a hoppability check.
pub fn crossing_paths(graph: &DirectedGraph) -> PathCollection {
    let at = |x, y| graph.vertex_at(x, y).expect("counterexample vertex");
    let o = at(0, 0);
    let xi = Path::from_vertices(graph, &[at(0, -1), o, at(0, 1)]).expect("path");
    let phi = Path::from_vertices(graph, &[at(-1, 0), o, at(1, 0)]).expect("path");
    PathCollection::explicit(vec![xi, phi]).expect("two paths")
}

/// Neighbours carry the point mass `(1, 1)`; the origin carries `origin_law`.
fn law_map(graph: &DirectedGraph, origin_law: WeightLaw) -> LawMap {
    let unit = WeightLaw::point_mass(int(1), int(1)).expect("point mass");
    LawMap::uniform(unit).with_override(graph.origin().expect("origin"), origin_law)
}

#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub p_a: ExactProbability,
    pub p_b: ExactProbability,
    /// `1 − E[(1 − W W̄)²]` at the origin, for each law.
    pub formula_a: Rational,
    pub formula_b: Rational,
    pub hoppability: HoppabilityReport,
    /// Zero functions at the origin for `|A|, |B| ≤ 4` on the grid `{0, 1/2, 1}`.
    pub zero: ZeroComparison,
}

fn formula(law: &WeightLaw) -> Rational {
    let miss: Rational = law
        .atoms()
        .expect("finite law")
        .iter()
        .map(|a| {
            let m = Rational::one() - &a.pair.w * &a.pair.w_bar;
            &a.prob * &m * &m
        })
        .sum();
    Rational::one() - miss
}

pub fn reproduce_counterexample() -> Result<CounterexampleReport, OracleError> {
    let graph = DirectedGraph::counterexample();
    let (a, b) = counterexample_laws();
    let paths = crossing_paths(&graph);
    let p_a = exact_event_probability(&graph, &ExactModel::Weighted { laws: law_map(&graph, a.clone()), kernel: Kernel::Product }, &paths)?;
    let p_b = exact_event_probability(&graph, &ExactModel::Weighted { laws: law_map(&graph, b.clone()), kernel: Kernel::Product }, &paths)?;
    let grid = vec![int(0), frac(1, 2), int(1)];
    let zero = compare_zero_functions(&a, &b, &Kernel::Product, 4, 4, &grid, &grid, true)?;
    Ok(CounterexampleReport {
        p_a,
        p_b,
        formula_a: formula(&a),
        formula_b: formula(&b),
        hoppability: paths.check_weakly_hoppable(),
        zero,
    })
}
