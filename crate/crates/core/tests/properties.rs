use num_traits::{One, Zero};
use percoweave_core::branching::{gw_generation_survival, offspring_law};
use percoweave_core::engine::{reach_cluster, sample_bond, Model};
use percoweave_core::oracle::{
    exact_event_probability, inclusion_exclusion_probability, random_instance, ExactModel, KernelChoice,
};
use percoweave_core::paths::{Path, PathCollection};
use percoweave_core::rational::{frac, int};
use percoweave_core::stochastics::{Kernel, ReplicationStream, WeightLaw};
use percoweave_core::{Boundary, DirectedGraph, Rational};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = DirectedGraph> {
    (2usize..=6).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect();
        proptest::sample::subsequence(pairs.clone(), 1..=pairs.len().min(10))
            .prop_shuffle()
            .prop_map(move |edges| DirectedGraph::from_edges(Some(n), &edges, false).unwrap())
    })
}

/// A random walk of up to `len` steps from `start`, as a path.
fn walk(graph: &DirectedGraph, start: usize, choices: &[usize]) -> Path {
    let mut v = start;
    let mut edges = Vec::new();
    for &c in choices {
        let out = graph.out_edges(v);
        if out.is_empty() {
            break;
        }
        let e = out[c % out.len()];
        edges.push(e);
        v = graph.edge(e).head;
    }
    Path::new(graph, start, edges).unwrap()
}

fn probability() -> impl Strategy<Value = Rational> {
    (0i64..=8).prop_map(|k| frac(k, 8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_sums_match_edge_count(g in graph_strategy()) {
        let out: usize = (0..g.vertex_count()).map(|v| g.out_degree(v)).sum();
        let inn: usize = (0..g.vertex_count()).map(|v| g.in_degree(v)).sum();
        prop_assert_eq!(out, g.edge_count());
        prop_assert_eq!(inn, g.edge_count());
    }

    #[test]
    fn lattice_enumeration_is_stable(side in 3usize..9, torus in any::<bool>()) {
        let b = if torus { Boundary::Torus } else { Boundary::Box };
        let a = DirectedGraph::square_lattice(side, b).unwrap();
        let c = DirectedGraph::square_lattice(side, b).unwrap();
        prop_assert_eq!(a.edges(), c.edges());
    }

    #[test]
    fn truncate_tail_round_trip(g in graph_strategy(), start in 0usize..6, steps in proptest::collection::vec(0usize..8, 0..8)) {
        let p = walk(&g, start % g.vertex_count(), &steps);
        for n in 0..=p.len() {
            let joined = p.truncate(n).unwrap().conjunction(&p.tail(n).unwrap()).unwrap();
            prop_assert_eq!(&joined, &p);
        }
        prop_assert!(p.truncate(p.len() + 1).is_err());
        let id_left = Path::trivial(p.start()).conjunction(&p).unwrap();
        let id_right = p.conjunction(&Path::trivial(p.end())).unwrap();
        prop_assert_eq!(&id_left, &p);
        prop_assert_eq!(&id_right, &p);
    }

    #[test]
    fn conjunction_is_associative(g in graph_strategy(), start in 0usize..6, steps in proptest::collection::vec(0usize..8, 0..9), i in 0usize..9, j in 0usize..9) {
        let p = walk(&g, start % g.vertex_count(), &steps);
        let (i, j) = (i.min(p.len()), j.min(p.len()));
        let (i, j) = (i.min(j), i.max(j));
        let a = p.truncate(i).unwrap();
        let rest = p.tail(i).unwrap();
        let b = rest.truncate(j - i).unwrap();
        let c = rest.tail(j - i).unwrap();
        let left = a.conjunction(&b).unwrap().conjunction(&c).unwrap();
        let right = a.conjunction(&b.conjunction(&c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(&left, &p);
    }

    #[test]
    fn all_paths_event_is_reachability(g in graph_strategy(), u in 0usize..6, v in 0usize..6, states in proptest::collection::vec(any::<bool>(), 10)) {
        let n = g.vertex_count();
        let (u, v) = (u % n, v % n);
        let c = PathCollection::all_paths_between(&g, u, v).unwrap();
        let open = |e: usize| states[e];
        let reach = g.reachable_from(u, open);
        prop_assert_eq!(c.holds(&g, open), reach[v]);
        prop_assert_eq!(c.holds_n(&g, g.edge_count(), open), reach[v]);
    }

    #[test]
    fn approximations_are_monotone(g in graph_strategy(), u in 0usize..6, v in 0usize..6, states in proptest::collection::vec(any::<bool>(), 10)) {
        let n = g.vertex_count();
        let (u, v) = (u % n, v % n);
        let open = |e: usize| states[e];
        let between = PathCollection::all_paths_between(&g, u, v).unwrap();
        let ind: Vec<bool> = (0..=g.edge_count()).map(|k| between.holds_n(&g, k, open)).collect();
        prop_assert!(ind.windows(2).all(|w| w[0] <= w[1]), "all_paths not nondecreasing: {:?}", ind);
        if u != v {
            let reaching = PathCollection::boundary_reaching(&g, u, vec![v]).unwrap();
            let ind: Vec<bool> = (0..=g.edge_count()).map(|k| reaching.holds_n(&g, k, open)).collect();
            prop_assert!(ind.windows(2).all(|w| w[0] >= w[1]), "boundary_reaching not nonincreasing: {:?}", ind);
            prop_assert_eq!(ind[g.edge_count()], reaching.holds(&g, open));
        }
    }

    #[test]
    fn listed_xi_n_matches_event(g in graph_strategy(), u in 0usize..6, v in 0usize..6, k in 0usize..=10, states in proptest::collection::vec(any::<bool>(), 10)) {
        let n = g.vertex_count();
        let (u, v) = (u % n, v % n);
        let k = k.min(g.edge_count());
        let open = |e: usize| states[e];
        for c in [PathCollection::all_paths_between(&g, u, v).unwrap(), PathCollection::boundary_reaching(&g, u, vec![v]).unwrap()] {
            let listed = c.build_xi_n(&g, k).unwrap();
            prop_assert_eq!(listed.holds(&g, open), c.holds_n(&g, k, open));
        }
    }

    #[test]
    fn hoppable_lists_match_their_loop_erasure(g in graph_strategy(), u in 0usize..6, v in 0usize..6, states in proptest::collection::vec(any::<bool>(), 10)) {
        let n = g.vertex_count();
        let (u, v) = (u % n, v % n);
        let listed = PathCollection::all_paths_between(&g, u, v).unwrap().build_xi_n(&g, g.edge_count()).unwrap();
        let paths = match listed.kind() {
            percoweave_core::paths::CollectionKind::Explicit(p) => p.clone(),
            _ => unreachable!(),
        };
        let (checked, report) = PathCollection::explicit_checked(paths.clone()).unwrap();
        prop_assert!(report.weakly_hoppable);
        let erased = PathCollection::explicit(paths.iter().map(Path::loop_erased).collect()).unwrap();
        let open = |e: usize| states[e];
        prop_assert_eq!(checked.holds(&g, open), erased.holds(&g, open));
    }

    #[test]
    fn kernels_depend_on_the_product_only(x in 0.0f64..3.0, y in 0.0f64..3.0) {
        for k in [Kernel::exponential(1.3).unwrap(), Kernel::geometric(frac(3, 2)).unwrap(), Kernel::Product] {
            if k.is_product() && x * y > 1.0 {
                continue;
            }
            let a = k.eval(x, y).unwrap();
            prop_assert_eq!(a, k.eval(y, x).unwrap());
            prop_assert_eq!(a, k.eval(x * y, 1.0).unwrap());
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn oracle_routes_agree(seed in 0u64..1000) {
        let inst = random_instance(seed, 0, &KernelChoice::ALL);
        let model = inst.exact_model();
        let a = exact_event_probability(&inst.graph, &model, &inst.collection).unwrap();
        if let Ok(b) = inclusion_exclusion_probability(&inst.graph, &model, &inst.collection) {
            prop_assert_eq!(&a.value, &b.value, "{}", inst);
        }
        prop_assert!(a.value >= Rational::zero() && a.value <= Rational::one());
    }

    #[test]
    fn point_mass_is_bond(seed in 0u64..1000, w in probability(), wb in probability()) {
        let inst = random_instance(seed, 1, &[KernelChoice::Product]);
        let law = WeightLaw::point_mass(w.clone(), wb.clone()).unwrap();
        let weighted = exact_event_probability(&inst.graph, &ExactModel::weighted(law, Kernel::Product), &inst.collection).unwrap();
        let bond = exact_event_probability(&inst.graph, &ExactModel::Bond { p: &w * &wb }, &inst.collection).unwrap();
        prop_assert_eq!(weighted.value, bond.value);
    }

    #[test]
    fn bond_probability_is_monotone_in_p(seed in 0u64..1000, k in 0i64..=9) {
        let inst = random_instance(seed, 2, &[KernelChoice::Product]);
        let p = frac(k, 10);
        let q = &p + frac(1, 10);
        let lo = exact_event_probability(&inst.graph, &ExactModel::Bond { p }, &inst.collection).unwrap();
        let hi = exact_event_probability(&inst.graph, &ExactModel::Bond { p: q }, &inst.collection).unwrap();
        prop_assert!(lo.value <= hi.value);
    }

    #[test]
    fn offspring_mean_identity(d in 1usize..5, raw in proptest::collection::vec((0i64..=6, 0i64..=6, 1i64..=5), 1..4)) {
        let total: i64 = raw.iter().map(|t| t.2).sum();
        let triples: Vec<_> = raw.iter().map(|&(w, wb, p)| (frac(w, 6), frac(wb, 6), frac(p, total))).collect();
        let law = WeightLaw::from_triples(&triples).unwrap();
        let o = offspring_law(&law, d).unwrap();
        prop_assert_eq!(o.probs.iter().sum::<Rational>(), int(1));
        prop_assert_eq!(o.mean.clone(), int(d as i64) * law.exact_moments().unwrap().e_wwbar);
        let s: Vec<f64> = (0..12).map(|k| gw_generation_survival(&o, k)).collect();
        prop_assert!(s.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn bond_coupling_is_monotone(seed in any::<u64>(), p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0) {
        let g = DirectedGraph::square_lattice(5, Boundary::Box).unwrap();
        let (lo, hi) = (p1.min(p2), p1.max(p2));
        let s = ReplicationStream::new(seed, 0);
        let a = sample_bond(&g, lo, &s).unwrap();
        let b = sample_bond(&g, hi, &s).unwrap();
        prop_assert!((0..g.edge_count()).all(|e| !a.is_open(e) || b.is_open(e)));
        let o = g.origin().unwrap();
        prop_assert!(reach_cluster(&g, &a, o, &[]).size <= reach_cluster(&g, &b, o, &[]).size);
    }

    #[test]
    fn weighted_model_validates_built_in_kernels(w in probability(), wb in probability()) {
        let law = WeightLaw::point_mass(w, wb).unwrap();
        prop_assert!(Model::weighted(percoweave_core::stochastics::LawMap::uniform(law), Kernel::Product).is_ok());
    }
}
