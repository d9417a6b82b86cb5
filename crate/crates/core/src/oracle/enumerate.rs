//! Exact `P(C^Ξ)` by enumeration over vertex weights and edge states.

use std::collections::HashMap;

use num_traits::{One, Zero};

use super::{ExactModel, ExactProbability, Method, OracleError};
use crate::graph::{DirectedGraph, EdgeId, VertexId};
use crate::paths::{CollectionKind, PathCollection, DEFAULT_PATH_CAP};
use crate::rational::Rational;
use crate::stochastics::{Kernel, WeightLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    /// Largest number of edges that can influence the event.
    pub max_edges: usize,
    /// Largest number of joint weight assignments over the vertices involved.
    pub max_assignments: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { max_edges: 20, max_assignments: 1_000_000 }
    }
}

/// Paths beyond this count are refused by the inclusion–exclusion route.
const INCLUSION_EXCLUSION_PATHS: usize = 16;

/// The event as a monotone function of a bitmask over the relevant edges.
enum Event {
    Reach { source: usize, targets: u64, tails: Vec<usize>, heads: Vec<usize> },
    Paths(Vec<u32>),
}

impl Event {
    fn holds(&self, open: u32) -> bool {
        match self {
            Event::Paths(masks) => masks.iter().any(|&m| m & open == m),
            Event::Reach { source, targets, tails, heads } => {
                let mut reached = 1u64 << source;
                loop {
                    if reached & targets != 0 {
                        return true;
                    }
                    let mut next = reached;
                    let mut bits = open;
                    while bits != 0 {
                        let i = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        if reached >> tails[i] & 1 == 1 {
                            next |= 1u64 << heads[i];
                        }
                    }
                    if next == reached {
                        return false;
                    }
                    reached = next;
                }
            }
        }
    }
}

/// One collapsed weight atom of a local vertex.
struct LocalAtom {
    w: Rational,
    w_bar: Rational,
    prob: Rational,
}

struct Prepared {
    k: usize,
    tails: Vec<usize>,
    heads: Vec<usize>,
    atoms: Vec<Vec<LocalAtom>>,
    /// `table[i][a][b]` = (q, 1 − q) for edge `i` with tail atom `a` and head atom `b`.
    table: Vec<Vec<Vec<(Rational, Rational)>>>,
    event: Event,
    exact: bool,
}

const UNSET: usize = usize::MAX;

impl Prepared {
    fn rec(&self, i: usize, open: u32, assign: &mut [usize]) -> Rational {
        let rest = if i >= 32 { 0 } else { (((1u64 << self.k) - 1) as u32) & !((1u32 << i).wrapping_sub(1)) };
        if !self.event.holds(open | rest) {
            return Rational::zero();
        }
        if self.event.holds(open) {
            return Rational::one();
        }
        let (t, h) = (self.tails[i], self.heads[i]);
        for v in [t, h] {
            if assign[v] == UNSET {
                let mut total = Rational::zero();
                for (a, atom) in self.atoms[v].iter().enumerate() {
                    assign[v] = a;
                    let r = self.rec(i, open, assign);
                    if !r.is_zero() {
                        total += &atom.prob * r;
                    }
                }
                assign[v] = UNSET;
                return total;
            }
        }
        let (q, nq) = &self.table[i][assign[t]][assign[h]];
        let mut total = Rational::zero();
        if !q.is_zero() {
            total += q * self.rec(i + 1, open | (1 << i), assign);
        }
        if !nq.is_zero() {
            total += nq * self.rec(i + 1, open, assign);
        }
        total
    }
}

fn law_atoms(law: &WeightLaw, vertex: VertexId) -> Result<Vec<(Rational, Rational, Rational)>, OracleError> {
    let atoms = law.atoms().ok_or(OracleError::NotFiniteSupport { vertex })?;
    Ok(atoms.into_iter().map(|a| (a.pair.w, a.pair.w_bar, a.prob)).collect())
}

/// Distinct atoms after forgetting coordinates the vertex never uses.
fn collapse(atoms: Vec<(Rational, Rational, Rational)>, uses_w: bool, uses_w_bar: bool) -> Vec<LocalAtom> {
    let mut index: HashMap<(Rational, Rational), usize> = HashMap::new();
    let mut out: Vec<LocalAtom> = Vec::new();
    for (w, wb, p) in atoms {
        let key = (if uses_w { w } else { Rational::zero() }, if uses_w_bar { wb } else { Rational::zero() });
        match index.get(&key) {
            Some(&i) => out[i].prob += p,
            None => {
                index.insert(key.clone(), out.len());
                out.push(LocalAtom { w: key.0, w_bar: key.1, prob: p });
            }
        }
    }
    out
}

fn site_law(p: &Rational) -> Result<WeightLaw, OracleError> {
    Ok(WeightLaw::site(p)?)
}

/// Orders relevant edges so that searches from the source are decided early.
fn order_edges(graph: &DirectedGraph, collection: &PathCollection, relevant: Vec<EdgeId>) -> Vec<EdgeId> {
    match collection.kind() {
        CollectionKind::Explicit(paths) => {
            let mut order = Vec::new();
            for p in paths {
                for &e in p.edges() {
                    if !order.contains(&e) {
                        order.push(e);
                    }
                }
            }
            order
        }
        _ => {
            let (source, _) = collection.search_target(graph).expect("canonical");
            let mut depth = vec![usize::MAX; graph.vertex_count()];
            depth[source] = 0;
            let mut queue = std::collections::VecDeque::from([source]);
            while let Some(v) = queue.pop_front() {
                for &e in graph.out_edges(v) {
                    let h = graph.edge(e).head;
                    if depth[h] == usize::MAX {
                        depth[h] = depth[v] + 1;
                        queue.push_back(h);
                    }
                }
            }
            let mut order = relevant;
            order.sort_by_key(|&e| (depth[graph.edge(e).tail], e));
            order
        }
    }
}

fn prepare(
    graph: &DirectedGraph,
    model: &ExactModel,
    collection: &PathCollection,
    caps: OracleCaps,
) -> Result<Option<Prepared>, OracleError> {
    model.validate()?;
    let relevant = collection.relevant_edges(graph);
    if relevant.is_empty() {
        return Ok(None);
    }
    if relevant.len() > caps.max_edges || relevant.len() > 31 {
        return Err(OracleError::InstanceTooLarge {
            edges: relevant.len(),
            edge_cap: caps.max_edges,
            assignments: f64::NAN,
            assignment_cap: caps.max_assignments,
        });
    }
    let order = order_edges(graph, collection, relevant);
    let k = order.len();

    let mut local: HashMap<VertexId, usize> = HashMap::new();
    let mut vertices: Vec<VertexId> = Vec::new();
    let mut id = |v: VertexId, vertices: &mut Vec<VertexId>| {
        *local.entry(v).or_insert_with(|| {
            vertices.push(v);
            vertices.len() - 1
        })
    };
    let mut tails = Vec::with_capacity(k);
    let mut heads = Vec::with_capacity(k);
    for &e in &order {
        let edge = graph.edge(e);
        tails.push(id(edge.tail, &mut vertices));
        heads.push(id(edge.head, &mut vertices));
    }
    let event = match collection.kind() {
        CollectionKind::Explicit(paths) => {
            let pos: HashMap<EdgeId, usize> = order.iter().enumerate().map(|(i, &e)| (e, i)).collect();
            Event::Paths(paths.iter().map(|p| p.edges().iter().fold(0u32, |m, e| m | 1 << pos[e])).collect())
        }
        _ => {
            let (source, targets) = collection.search_target(graph).expect("canonical");
            let source = id(source, &mut vertices);
            let mut mask = 0u64;
            for (v, &l) in local.iter() {
                if targets[*v] {
                    mask |= 1u64 << l;
                }
            }
            Event::Reach { source, targets: mask, tails: tails.clone(), heads: heads.clone() }
        }
    };
    if vertices.len() > 64 {
        return Err(OracleError::InvalidArgument("more than 64 vertices touch the relevant edges".into()));
    }

    let uses_w: Vec<bool> = (0..vertices.len()).map(|l| tails.contains(&l)).collect();
    let uses_w_bar: Vec<bool> = (0..vertices.len()).map(|l| heads.contains(&l)).collect();
    let one = || vec![LocalAtom { w: Rational::zero(), w_bar: Rational::zero(), prob: Rational::one() }];
    let (atoms, kernel): (Vec<Vec<LocalAtom>>, Option<Kernel>) = match model {
        ExactModel::Bond { .. } => (vertices.iter().map(|_| one()).collect(), None),
        ExactModel::Site { p } => {
            let law = site_law(p)?;
            let atoms = (0..vertices.len())
                .map(|l| Ok(collapse(law_atoms(&law, vertices[l])?, uses_w[l], uses_w_bar[l])))
                .collect::<Result<_, OracleError>>()?;
            (atoms, Some(Kernel::Product))
        }
        ExactModel::Weighted { laws, kernel } => {
            let atoms = (0..vertices.len())
                .map(|l| Ok(collapse(law_atoms(laws.law_for(vertices[l]), vertices[l])?, uses_w[l], uses_w_bar[l])))
                .collect::<Result<_, OracleError>>()?;
            (atoms, Some(kernel.clone()))
        }
    };
    let assignments: f64 = atoms.iter().map(|a| a.len() as f64).product();
    if assignments > caps.max_assignments as f64 {
        return Err(OracleError::InstanceTooLarge {
            edges: k,
            edge_cap: caps.max_edges,
            assignments,
            assignment_cap: caps.max_assignments,
        });
    }

    let mut exact = true;
    let mut cache: HashMap<Rational, (Rational, Rational)> = HashMap::new();
    let mut table = Vec::with_capacity(k);
    for i in 0..k {
        let (t, h) = (tails[i], heads[i]);
        let mut rows = Vec::with_capacity(atoms[t].len());
        for a in &atoms[t] {
            let mut row = Vec::with_capacity(atoms[h].len());
            for b in &atoms[h] {
                let entry = match (&kernel, model) {
                    (None, ExactModel::Bond { p }) => (p.clone(), Rational::one() - p),
                    (Some(kernel), _) => {
                        let z = &a.w * &b.w_bar;
                        if let Some(hit) = cache.get(&z) {
                            hit.clone()
                        } else {
                            let (q, is_exact) = kernel.eval_rational(&z)?;
                            exact &= is_exact;
                            let entry = (q.clone(), Rational::one() - q);
                            cache.insert(z, entry.clone());
                            entry
                        }
                    }
                    _ => unreachable!("bond model has no kernel"),
                };
                row.push(entry);
            }
            rows.push(row);
        }
        table.push(rows);
    }
    Ok(Some(Prepared { k, tails, heads, atoms, table, event, exact }))
}

/// Exact `P(C^Ξ)` with the default caps.
pub fn exact_event_probability(
    graph: &DirectedGraph,
    model: &ExactModel,
    collection: &PathCollection,
) -> Result<ExactProbability, OracleError> {
    exact_event_probability_with(graph, model, collection, OracleCaps::default())
}

/// Exact `P(C^Ξ)`: a pruned search over edge states in which each vertex's
/// weight atom is chosen the first time an edge needs it.
pub fn exact_event_probability_with(
    graph: &DirectedGraph,
    model: &ExactModel,
    collection: &PathCollection,
    caps: OracleCaps,
) -> Result<ExactProbability, OracleError> {
    let Some(prep) = prepare(graph, model, collection, caps)? else {
        let value = if collection.holds(graph, |_| false) { Rational::one() } else { Rational::zero() };
        return Ok(ExactProbability::exact(value, Method::WeightAndEdgeEnumeration));
    };
    let mut assign = vec![UNSET; prep.atoms.len()];
    let value = prep.rec(0, 0, &mut assign);
    Ok(ExactProbability { value, exact: prep.exact, method: Method::WeightAndEdgeEnumeration })
}

/// Exact `P(C^Ξ)` by enumerating every joint weight assignment and applying
/// inclusion–exclusion over the (loop-erased) paths. Independent of the
/// search above; limited to small path lists.
pub fn inclusion_exclusion_probability(
    graph: &DirectedGraph,
    model: &ExactModel,
    collection: &PathCollection,
) -> Result<ExactProbability, OracleError> {
    let paths = collection
        .minimal_paths(graph, DEFAULT_PATH_CAP)
        .map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
    if paths.iter().any(|p| p.is_trivial()) {
        return Ok(ExactProbability::exact(Rational::one(), Method::InclusionExclusion));
    }
    if paths.len() > INCLUSION_EXCLUSION_PATHS {
        return Err(OracleError::InvalidArgument(format!(
            "{} paths exceed the inclusion-exclusion limit of {INCLUSION_EXCLUSION_PATHS}",
            paths.len()
        )));
    }
    if paths.is_empty() {
        return Ok(ExactProbability::exact(Rational::zero(), Method::InclusionExclusion));
    }
    let explicit = PathCollection::explicit(paths.clone()).map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
    let Some(prep) = prepare(graph, model, &explicit, OracleCaps::default())? else {
        unreachable!("nontrivial paths have edges")
    };
    let Event::Paths(masks) = &prep.event else { unreachable!("explicit event") };
    let unions: Vec<(u32, bool)> = (1u32..(1 << masks.len()))
        .map(|s| {
            let m = (0..masks.len()).filter(|i| s >> i & 1 == 1).fold(0u32, |m, i| m | masks[i]);
            (m, s.count_ones() % 2 == 1)
        })
        .collect();
    let n = prep.atoms.len();
    let mut digits = vec![0usize; n];
    let mut total = Rational::zero();
    loop {
        let weight: Rational = (0..n).map(|v| &prep.atoms[v][digits[v]].prob).product();
        let q: Vec<&Rational> = (0..prep.k).map(|i| &prep.table[i][digits[prep.tails[i]]][digits[prep.heads[i]]].0).collect();
        let mut p = Rational::zero();
        for &(m, odd) in &unions {
            let term: Rational = (0..prep.k).filter(|i| m >> i & 1 == 1).map(|i| q[i]).product();
            if odd {
                p += term;
            } else {
                p -= term;
            }
        }
        total += weight * p;
        // Mixed-radix increment.
        let mut v = 0;
        loop {
            if v == n {
                return Ok(ExactProbability { value: total, exact: prep.exact, method: Method::InclusionExclusion });
            }
            digits[v] += 1;
            if digits[v] < prep.atoms[v].len() {
                break;
            }
            digits[v] = 0;
            v += 1;
        }
    }
}

/// `E|C_u| = Σ_v P(u ⇝ v)`, exactly.
pub(crate) fn expected_cluster_size(
    graph: &DirectedGraph,
    model: &ExactModel,
    source: VertexId,
) -> Result<ExactProbability, OracleError> {
    let mut total = Rational::one();
    let mut exact = true;
    for v in 0..graph.vertex_count() {
        if v == source {
            continue;
        }
        let c = PathCollection::all_paths_between(graph, source, v).map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
        let p = exact_event_probability(graph, model, &c)?;
        exact &= p.exact;
        total += p.value;
    }
    Ok(ExactProbability { value: total, exact, method: Method::WeightAndEdgeEnumeration })
}
