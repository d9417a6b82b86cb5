//! Exact checks of the comparison inequalities on small instances.

use std::fmt;

use serde::Serialize;

use super::enumerate::expected_cluster_size;
use super::{
    at_most, compare_zero_functions, exact_event_probability, ExactModel, ExactProbability, OracleError, ZeroWitness,
};
use crate::graph::{DirectedGraph, VertexId};
use crate::paths::{CollectionKind, PathCollection};
use crate::rational::{self, Rational};
use crate::stochastics::kernel::uniform_grid;
use crate::stochastics::{Kernel, LawMap, WeightLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `P(C^Ξ) ≤ P_p^bond(C^Ξ)`.
    BondUpperBound,
    /// `P(C^Ξ) ≥ P_p^site(C^Ξ)`.
    SiteLowerBound,
    /// `P^b(C^Ξ) ≤ P^a(C^Ξ)` given `z(P^a) ≤ z(P^b)`.
    ZeroFunctionComparison,
    /// `E|C_u| ≤ E_p^bond|C_u|`.
    ClusterSizeBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    /// The zero-function premise failed on the grid; no conclusion is drawn.
    PremiseNotMet,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::PremiseNotMet => "premise_not_met",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub kind: CheckKind,
    pub instance: String,
    pub lhs: ExactProbability,
    pub rhs: ExactProbability,
    /// Comparison parameter `p`, when there is one.
    pub p: Option<Rational>,
    pub verdict: Verdict,
    /// Margin by which the inequality holds; negative when violated.
    pub slack: Rational,
    pub witness: Option<String>,
}

impl CheckRecord {
    pub fn exact(&self) -> bool {
        self.lhs.exact && self.rhs.exact
    }
}

fn describe_collection(graph: &DirectedGraph, c: &PathCollection) -> String {
    match c.kind() {
        CollectionKind::Explicit(paths) => {
            let shown: Vec<String> = paths.iter().map(|p| p.to_string()).collect();
            format!("explicit[{}]", shown.join("; "))
        }
        CollectionKind::AllPathsBetween { source, target } => format!("all_paths({source}->{target})"),
        CollectionKind::BoundaryReaching { source, boundary } => {
            format!("boundary_reaching({source}, |B|={} of {})", boundary.len(), graph.vertex_count())
        }
    }
}

fn describe(graph: &DirectedGraph, laws: &LawMap, kernel: &Kernel, c: &PathCollection) -> String {
    let edges: Vec<String> = graph.edges().iter().map(|e| format!("{}>{}", e.tail, e.head)).collect();
    format!("graph[{}] law {} kernel {} {}", edges.join(","), laws.default_law(), kernel.name(), describe_collection(graph, c))
}

fn require_hoppable(c: &PathCollection) -> Result<(), OracleError> {
    if c.certificate().is_hoppable() {
        Ok(())
    } else {
        Err(OracleError::HypothesisNotMet("path collection is not certified hoppable".into()))
    }
}

fn iid_law(laws: &LawMap) -> Result<&WeightLaw, OracleError> {
    if !laws.is_identical() {
        return Err(OracleError::HypothesisNotMet("weights are not identically distributed".into()));
    }
    Ok(laws.default_law())
}

fn require_unit_square(law: &WeightLaw) -> Result<(), OracleError> {
    if law.support().within_unit_square() {
        Ok(())
    } else {
        Err(OracleError::HypothesisNotMet("product kernel needs weights in [0, 1]^2".into()))
    }
}

/// Built-in kernels are certified analytically; custom ones are checked on a grid over the products of atoms.
fn require_valid_kernel(kernel: &Kernel, law: &WeightLaw) -> Result<(), OracleError> {
    match kernel {
        Kernel::Product => require_unit_square(law),
        Kernel::Custom(_) => {
            let s = law.support();
            let z_max = (s.w.1 * s.w_bar.1).max(1e-9);
            let report = kernel.validate(&uniform_grid(z_max, 101));
            if report.passed {
                Ok(())
            } else {
                Err(OracleError::HypothesisNotMet(format!("kernel {} failed validation", kernel.name())))
            }
        }
        _ => Ok(()),
    }
}

fn exact_moments(law: &WeightLaw) -> Result<crate::stochastics::Moments<Rational>, OracleError> {
    law.exact_moments().ok_or(OracleError::NotFiniteSupport { vertex: 0 })
}

/// The default bond parameter `κ(max(E WW̄, E W · E W̄))` and whether it is exact.
pub fn default_bond_parameter(law: &WeightLaw, kernel: &Kernel) -> Result<(Rational, bool), OracleError> {
    let m = exact_moments(law)?;
    let prod = &m.e_w * &m.e_wbar;
    let z = if m.e_wwbar > prod { m.e_wwbar } else { prod };
    Ok(kernel.eval_rational(&z)?)
}

fn record(kind: CheckKind, instance: String, lhs: ExactProbability, rhs: ExactProbability, p: Option<Rational>) -> CheckRecord {
    let holds = at_most(&lhs, &rhs);
    let slack = &rhs.value - &lhs.value;
    CheckRecord { kind, instance, lhs, rhs, p, verdict: if holds { Verdict::Holds } else { Verdict::Violated }, slack, witness: None }
}

/// `P(C^Ξ) ≤ P_p^bond(C^Ξ)` for i.i.d. weights, a nondecreasing concave kernel and
/// a hoppable `Ξ`. `p` defaults to `κ(max(E WW̄, E W · E W̄))`; smaller values are refused.
pub fn verify_bond_upper_bound(
    graph: &DirectedGraph,
    laws: &LawMap,
    kernel: &Kernel,
    collection: &PathCollection,
    p: Option<Rational>,
) -> Result<CheckRecord, OracleError> {
    let law = iid_law(laws)?;
    require_valid_kernel(kernel, law)?;
    require_hoppable(collection)?;
    let (default_p, p_exact) = default_bond_parameter(law, kernel)?;
    let p = match p {
        Some(p) if p < default_p => {
            return Err(OracleError::HypothesisNotMet(format!(
                "p = {} is below {}",
                rational::render(&p),
                rational::render(&default_p)
            )))
        }
        Some(p) => p,
        None => default_p,
    };
    let lhs = exact_event_probability(graph, &ExactModel::Weighted { laws: laws.clone(), kernel: kernel.clone() }, collection)?;
    let mut rhs = exact_event_probability(graph, &ExactModel::Bond { p: p.clone() }, collection)?;
    rhs.exact &= p_exact;
    Ok(record(CheckKind::BondUpperBound, describe(graph, laws, kernel, collection), lhs, rhs, Some(p)))
}

/// `P(C^Ξ) ≥ P_p^site(C^Ξ)` for `κ = xy`, weights in `[0, 1]²` and a hoppable `Ξ`.
/// `p` defaults to `E WW̄`; larger values are refused. Here `lhs` is the weighted
/// probability, `rhs` the site one, and the slack is `lhs − rhs`.
pub fn verify_site_lower_bound(
    graph: &DirectedGraph,
    laws: &LawMap,
    collection: &PathCollection,
    p: Option<Rational>,
) -> Result<CheckRecord, OracleError> {
    let law = iid_law(laws)?;
    require_unit_square(law)?;
    require_hoppable(collection)?;
    let default_p = exact_moments(law)?.e_wwbar;
    let p = match p {
        Some(p) if p > default_p => {
            return Err(OracleError::HypothesisNotMet(format!(
                "p = {} exceeds E(W W̄) = {}",
                rational::render(&p),
                rational::render(&default_p)
            )))
        }
        Some(p) => p,
        None => default_p,
    };
    let weighted = exact_event_probability(graph, &ExactModel::Weighted { laws: laws.clone(), kernel: Kernel::Product }, collection)?;
    let site = exact_event_probability(graph, &ExactModel::Site { p: p.clone() }, collection)?;
    let mut rec = record(CheckKind::SiteLowerBound, describe(graph, laws, &Kernel::Product, collection), site, weighted, Some(p));
    std::mem::swap(&mut rec.lhs, &mut rec.rhs);
    Ok(rec)
}

/// `E|C_u| ≤ E_p^bond|C_u|` at `p = E WW̄`, for `κ = xy` and laws with `E WW̄ ≥ E W · E W̄`.
pub fn verify_cluster_size_bound(graph: &DirectedGraph, law: &WeightLaw, source: VertexId) -> Result<CheckRecord, OracleError> {
    require_unit_square(law)?;
    let m = exact_moments(law)?;
    if m.e_wwbar < &m.e_w * &m.e_wbar {
        return Err(OracleError::HypothesisNotMet("E(W W̄) < E(W) E(W̄)".into()));
    }
    let laws = LawMap::uniform(law.clone());
    let lhs = exact_expected_cluster_size(graph, &ExactModel::Weighted { laws: laws.clone(), kernel: Kernel::Product }, source)?;
    let rhs = exact_expected_cluster_size(graph, &ExactModel::Bond { p: m.e_wwbar.clone() }, source)?;
    let instance = format!("cluster of {source} in {} vertices, law {law}", graph.vertex_count());
    Ok(record(CheckKind::ClusterSizeBound, instance, lhs, rhs, Some(m.e_wwbar)))
}

/// `E|C_u| = Σ_v P(u ⇝ v)`, exactly.
pub fn exact_expected_cluster_size(
    graph: &DirectedGraph,
    model: &ExactModel,
    source: VertexId,
) -> Result<ExactProbability, OracleError> {
    if source >= graph.vertex_count() {
        return Err(OracleError::InvalidArgument(format!("source {source} is not in the graph")));
    }
    expected_cluster_size(graph, model, source)
}

/// Distinct values of one weight coordinate over all laws, with midpoints added `refine + 1` times.
fn grid(maps: &[&LawMap], graph: &DirectedGraph, use_w: bool, refine: u32) -> Result<Vec<Rational>, OracleError> {
    let mut values: Vec<Rational> = Vec::new();
    for map in maps {
        for v in 0..graph.vertex_count() {
            let atoms = map.law_for(v).atoms().ok_or(OracleError::NotFiniteSupport { vertex: v })?;
            values.extend(atoms.into_iter().map(|a| if use_w { a.pair.w } else { a.pair.w_bar }));
        }
    }
    values.sort();
    values.dedup();
    for _ in 0..=refine {
        let mids: Vec<Rational> = values.windows(2).map(|w| (&w[0] + &w[1]) / Rational::from_integer(2.into())).collect();
        values.extend(mids);
        values.sort();
        values.dedup();
    }
    Ok(values)
}

/// Checks `z_v(P^a) ≤ z_v(P^b)` at every vertex with `|A|` and `|B|` up to the
/// vertex's out- and in-degree, on grids built from the atoms of both law maps.
/// Returns the first vertex where it fails.
pub fn compare_zero_function_premise(
    graph: &DirectedGraph,
    laws_a: &LawMap,
    laws_b: &LawMap,
    kernel: &Kernel,
    refine: u32,
) -> Result<Option<(VertexId, ZeroWitness)>, OracleError> {
    let x_grid = grid(&[laws_a, laws_b], graph, false, refine)?;
    let y_grid = grid(&[laws_a, laws_b], graph, true, refine)?;
    let mut checked: Vec<(&WeightLaw, &WeightLaw, usize, usize)> = Vec::new();
    for v in 0..graph.vertex_count() {
        let (a, b) = (laws_a.law_for(v), laws_b.law_for(v));
        if a == b {
            continue;
        }
        let (na, nb) = (graph.out_degree(v), graph.in_degree(v));
        // A larger degree pair covers every smaller one.
        if checked.iter().any(|&(ca, cb, ma, mb)| ca == a && cb == b && ma >= na && mb >= nb) {
            continue;
        }
        let cmp = compare_zero_functions(a, b, kernel, na, nb, &x_grid, &y_grid, false)?;
        if let Some(w) = cmp.b_below {
            return Ok(Some((v, w)));
        }
        checked.push((a, b, na, nb));
    }
    Ok(None)
}

/// `P^b(C^Ξ) ≤ P^a(C^Ξ)` for hoppable `Ξ` whenever `z_v(P^a) ≤ z_v(P^b)` at every vertex.
///
/// The premise is checked on a finite grid. A violated conclusion under a
/// passing premise is rechecked once on a refined grid before it is reported.
pub fn verify_zero_function_comparison(
    graph: &DirectedGraph,
    laws_a: &LawMap,
    laws_b: &LawMap,
    kernel: &Kernel,
    collection: &PathCollection,
) -> Result<CheckRecord, OracleError> {
    require_hoppable(collection)?;
    let instance = format!(
        "{} vs law {}",
        describe(graph, laws_a, kernel, collection),
        laws_b.default_law()
    );
    let pa = exact_event_probability(graph, &ExactModel::Weighted { laws: laws_a.clone(), kernel: kernel.clone() }, collection)?;
    let pb = exact_event_probability(graph, &ExactModel::Weighted { laws: laws_b.clone(), kernel: kernel.clone() }, collection)?;
    let mut rec = record(CheckKind::ZeroFunctionComparison, instance, pb, pa, None);
    let premise = |refine| compare_zero_function_premise(graph, laws_a, laws_b, kernel, refine);
    let mut failure = premise(0)?;
    if failure.is_none() && rec.verdict == Verdict::Violated {
        failure = premise(1)?;
    }
    if let Some((v, w)) = failure {
        rec.verdict = Verdict::PremiseNotMet;
        rec.witness = Some(format!("vertex {v}: {} z_a={} z_b={}", w.query, w.z_a, w.z_b));
    }
    Ok(rec)
}
