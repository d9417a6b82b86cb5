use num_traits::{One, Zero};
use percoweave_core::oracle::{
    check_kernel_reparametrization, compare_zero_functions, counterexample_laws, crossing_paths,
    exact_event_probability, random_instance, reproduce_counterexample, verify_bond_upper_bound,
    verify_site_lower_bound, verify_zero_function_comparison, zero_function, ExactModel, KernelChoice, Verdict,
    ZeroOrdering, ZeroQuery,
};
use percoweave_core::paths::{Path, PathCollection};
use percoweave_core::rational::{frac, int};
use percoweave_core::stochastics::{Kernel, LawMap, WeightLaw};
use percoweave_core::{DirectedGraph, Rational};

/// Sums over every joint weight assignment and every edge configuration.
fn brute_force(graph: &DirectedGraph, law: &WeightLaw, kernel: &Kernel, c: &PathCollection) -> Rational {
    let atoms = law.atoms().unwrap();
    let n = graph.vertex_count();
    let m = graph.edge_count();
    let mut total = Rational::zero();
    let mut digits = vec![0usize; n];
    'assign: loop {
        let weight: Rational = digits.iter().map(|&d| atoms[d].prob.clone()).product();
        let q: Vec<Rational> = graph
            .edges()
            .iter()
            .map(|e| {
                let z = &atoms[digits[e.tail]].pair.w * &atoms[digits[e.head]].pair.w_bar;
                kernel.eval_rational(&z).unwrap().0
            })
            .collect();
        for mask in 0u32..(1 << m) {
            if !c.holds(graph, |e| mask >> e & 1 == 1) {
                continue;
            }
            let mut p = weight.clone();
            for (e, qe) in q.iter().enumerate() {
                p *= if mask >> e & 1 == 1 { qe.clone() } else { Rational::one() - qe };
            }
            total += p;
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < atoms.len() {
                continue 'assign;
            }
            *d = 0;
        }
        return total;
    }
}

#[test]
fn oracle_matches_brute_force() {
    let mut checked = 0;
    for i in 0..200 {
        let inst = random_instance(17, i, &[KernelChoice::Product, KernelChoice::Geometric]);
        let atoms = inst.law.atoms().unwrap().len();
        if inst.graph.edge_count() > 8 || atoms.pow(inst.graph.vertex_count() as u32) > 243 {
            continue;
        }
        let fast = exact_event_probability(&inst.graph, &inst.exact_model(), &inst.collection).unwrap();
        assert_eq!(fast.value, brute_force(&inst.graph, &inst.law, &inst.kernel, &inst.collection), "{inst}");
        assert!(fast.exact);
        checked += 1;
    }
    assert!(checked >= 30, "only {checked} instances were small enough");
}

#[test]
fn exact_probability_examples() {
    let g = DirectedGraph::from_edges(None, &[(0, 1)], false).unwrap();
    let c = PathCollection::all_paths_between(&g, 0, 1).unwrap();
    let site = WeightLaw::site(&frac(1, 2)).unwrap();
    assert_eq!(exact_event_probability(&g, &ExactModel::weighted(site, Kernel::Product), &c).unwrap().value, frac(1, 4));

    let r = reproduce_counterexample().unwrap();
    assert_eq!(r.p_a.render(), "3/10");
    assert_eq!(r.p_b.render(), "1/5");
}

#[test]
fn zero_function_examples() {
    let (a, b) = counterexample_laws();
    let k = Kernel::Product;
    assert_eq!(zero_function(&ZeroQuery::new(vec![], vec![]), &a, &k).unwrap().value, int(1));
    assert_eq!(zero_function(&ZeroQuery::new(vec![int(1)], vec![int(1)]), &a, &k).unwrap().value, frac(4, 5));
    // Atom by atom: (0,0) gives 1, (1/2,1) gives 1/4, (1,1/2) gives 1/2.
    let expected = frac(3, 5) + frac(1, 5) * frac(1, 4) + frac(1, 5) * frac(1, 2);
    let q = ZeroQuery::new(vec![int(1), int(1)], vec![int(1)]);
    assert_eq!(zero_function(&q, &a, &k).unwrap().value, expected);
    assert_eq!(expected, frac(3, 4));
    assert_eq!(zero_function(&q, &b, &k).unwrap().value, frac(4, 5));

    let grid = vec![int(0), frac(1, 2), int(1)];
    let slice = compare_zero_functions(&a, &b, &k, 1, 1, &grid, &grid, true).unwrap();
    for row in slice.rows.iter().filter(|r| r.query.x.len() == 1 && r.query.y.len() == 1) {
        let xy = &row.query.x[0] * &row.query.y[0];
        assert_eq!(row.z_a.value, int(1) - &xy / int(5));
        assert_eq!(row.z_b.value, int(1) - xy / int(5));
    }
    let full = compare_zero_functions(&a, &b, &k, 2, 1, &grid, &grid, false).unwrap();
    assert_eq!(full.ordering, ZeroOrdering::Incomparable);
    let same = compare_zero_functions(&b, &b, &k, 3, 3, &grid, &grid, false).unwrap();
    assert_eq!(same.ordering, ZeroOrdering::Equal);
}

#[test]
fn the_non_hoppable_pair_is_refused() {
    let g = DirectedGraph::counterexample();
    let (a, b) = counterexample_laws();
    let unit = WeightLaw::point_mass(int(1), int(1)).unwrap();
    let la = LawMap::uniform(unit.clone()).with_override(0, a);
    let lb = LawMap::uniform(unit).with_override(0, b);
    let paths = crossing_paths(&g);
    assert!(verify_zero_function_comparison(&g, &la, &lb, &Kernel::Product, &paths).is_err());
    let pa = exact_event_probability(&g, &ExactModel::Weighted { laws: la, kernel: Kernel::Product }, &paths).unwrap();
    let pb = exact_event_probability(&g, &ExactModel::Weighted { laws: lb, kernel: Kernel::Product }, &paths).unwrap();
    assert!(pa.value > pb.value);
}

#[test]
fn falsification_sweeps_hold() {
    for i in 0..60 {
        let inst = random_instance(99, i, &KernelChoice::ALL);
        let r = verify_bond_upper_bound(&inst.graph, &inst.laws(), &inst.kernel, &inst.collection, None).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{inst}");
        let inst = random_instance(98, i, &[KernelChoice::Product]);
        let r = verify_site_lower_bound(&inst.graph, &inst.laws(), &inst.collection, None).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{inst}");
    }
}

#[test]
fn zero_comparison_on_a_star_agrees_with_exact_probabilities() {
    let star = DirectedGraph::from_edges(None, &[(0, 1), (0, 2), (0, 3), (0, 4)], false).unwrap();
    let c = PathCollection::boundary_reaching(&star, 0, vec![1, 2, 3, 4]).unwrap();
    let point = LawMap::uniform(WeightLaw::point_mass(frac(1, 2), frac(1, 2)).unwrap());
    let comonotone = LawMap::uniform(
        WeightLaw::from_triples(&[(frac(1, 4), frac(1, 4), frac(1, 2)), (frac(3, 4), frac(3, 4), frac(1, 2))]).unwrap(),
    );
    for (a, b) in [(&point, &comonotone), (&comonotone, &point)] {
        let r = verify_zero_function_comparison(&star, a, b, &Kernel::Product, &c).unwrap();
        match r.verdict {
            Verdict::Holds => assert!(r.lhs.value <= r.rhs.value),
            Verdict::PremiseNotMet => assert!(r.witness.is_some()),
            Verdict::Violated => panic!("conclusion violated under a passing premise: {r:?}"),
        }
    }
}

#[test]
fn trivial_path_always_open() {
    let g = DirectedGraph::from_edges(None, &[(0, 1), (1, 2)], false).unwrap();
    let c = PathCollection::explicit(vec![Path::trivial(2), Path::from_vertices(&g, &[0, 1, 2]).unwrap()]).unwrap();
    assert!(c.holds(&g, |_| false));
    let p = exact_event_probability(&g, &ExactModel::Bond { p: frac(1, 7) }, &c).unwrap();
    assert_eq!(p.value, int(1));
}

#[test]
fn reparametrization_examples() {
    let grid: Vec<Rational> = vec![int(0), frac(1, 4), frac(1, 2), int(1), int(2)];
    let r = check_kernel_reparametrization(&grid, &grid, 2.0, &int(1), 1).unwrap();
    assert!(r.max_marginal_error < 1e-10);
    let r = check_kernel_reparametrization(&[int(1)], &[int(1)], 1.0, &int(1), 2).unwrap();
    assert_eq!(r.joints[0].all_open(), (frac(1, 4), frac(1, 3)));
    assert!(r.max_total_variation > Rational::zero());
    assert!(check_kernel_reparametrization(&[int(1)], &[int(1)], 1.0, &int(1), 4).is_err());
}
