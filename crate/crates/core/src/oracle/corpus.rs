//! Random small instances for falsification sweeps.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ExactModel;
use crate::engine::{EngineError, Model};
use crate::graph::DirectedGraph;
use crate::paths::PathCollection;
use crate::rational::{frac, int, render, Rational};
use crate::stochastics::{Kernel, LawMap, WeightLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    Product,
    Exponential,
    Geometric,
}

impl KernelChoice {
    pub const ALL: [KernelChoice; 3] = [KernelChoice::Product, KernelChoice::Exponential, KernelChoice::Geometric];
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub index: u64,
    pub graph: DirectedGraph,
    pub law: WeightLaw,
    pub kernel_choice: KernelChoice,
    pub kernel: Kernel,
    pub collection: PathCollection,
}

impl Instance {
    pub fn laws(&self) -> LawMap {
        LawMap::uniform(self.law.clone())
    }

    pub fn exact_model(&self) -> ExactModel {
        ExactModel::Weighted { laws: self.laws(), kernel: self.kernel.clone() }
    }

    pub fn model(&self) -> Result<Model, EngineError> {
        Model::weighted(self.laws(), self.kernel.clone())
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.graph.edges().iter().map(|e| format!("{}>{}", e.tail, e.head)).collect();
        write!(f, "#{} edges [{}] law {} kernel {} {:?}", self.index, edges.join(","), self.law, self.kernel.name(), self.collection.kind())
    }
}

fn pick_weight(rng: &mut ChaCha8Rng, choice: KernelChoice) -> Rational {
    // Product kernel needs weights in [0, 1]; the others accept any nonnegative product.
    let top = if choice == KernelChoice::Product { 4 } else { 8 };
    frac(rng.gen_range(0..=top), 4)
}

/// Instance number `index` of the corpus drawn from `seed`, restricted to `kernels`.
/// Graphs have 2 to 6 vertices and 1 to 10 edges; laws have 1 to 3 rational atoms.
pub fn random_instance(seed: u64, index: u64, kernels: &[KernelChoice]) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.gen_range(2..=6usize);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    pairs.shuffle(&mut rng);
    let m = rng.gen_range(1..=pairs.len().min(10));
    pairs.truncate(m);
    let graph = DirectedGraph::from_edges(Some(n), &pairs, false).expect("distinct pairs without loops");

    let kernel_choice = *kernels.choose(&mut rng).expect("at least one kernel");
    let parameter = [frac(1, 2), int(1), int(2)].choose(&mut rng).expect("nonempty").clone();
    let kernel = match kernel_choice {
        KernelChoice::Product => Kernel::Product,
        KernelChoice::Exponential => Kernel::exponential(crate::rational::to_f64(&parameter)).expect("positive"),
        KernelChoice::Geometric => Kernel::geometric(parameter).expect("positive"),
    };

    let atoms = rng.gen_range(1..=3usize);
    let weights: Vec<i64> = (0..atoms).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let triples: Vec<(Rational, Rational, Rational)> = weights
        .iter()
        .map(|&k| (pick_weight(&mut rng, kernel_choice), pick_weight(&mut rng, kernel_choice), frac(k, total)))
        .collect();
    let law = WeightLaw::from_triples(&triples).expect("probabilities sum to one");

    let source = rng.gen_range(0..n);
    let others: Vec<usize> = (0..n).filter(|&v| v != source).collect();
    let collection = if rng.gen_bool(0.5) {
        let target = *others.choose(&mut rng).expect("n >= 2");
        PathCollection::all_paths_between(&graph, source, target).expect("valid vertices")
    } else {
        let k = rng.gen_range(1..=others.len());
        let boundary: Vec<usize> = others.choose_multiple(&mut rng, k).copied().collect();
        PathCollection::boundary_reaching(&graph, source, boundary).expect("valid vertices")
    };
    Instance { index, graph, law, kernel_choice, kernel, collection }
}

/// Renders a law's atoms as `(w,w̄):p` items.
pub fn render_law(law: &WeightLaw) -> String {
    match law.atoms() {
        Some(atoms) => atoms
            .iter()
            .map(|a| format!("({},{}):{}", render(&a.pair.w), render(&a.pair.w_bar), render(&a.prob)))
            .collect::<Vec<_>>()
            .join(" "),
        None => law.to_string(),
    }
}
