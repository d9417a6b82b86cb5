//! Experiment configuration files (TOML).

use std::fmt;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use percoweave_core::paths::{Path, PathCollection};
use percoweave_core::rational::{parse_rational, Rational};
use percoweave_core::stochastics::{Kernel, LawMap, Marginal, WeightLaw};
use percoweave_core::{Boundary, DirectedGraph};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "simulate")]
    Simulate,
    #[serde(rename = "sweep")]
    Sweep,
    #[serde(rename = "verify-bond", alias = "verify-1.1")]
    VerifyBond,
    #[serde(rename = "verify-site", alias = "verify-1.2")]
    VerifySite,
    #[serde(rename = "verify-zero", alias = "verify-3.1")]
    VerifyZero,
    #[serde(rename = "zerofn")]
    ZeroFn,
    #[serde(rename = "counterexample")]
    Counterexample,
    #[serde(rename = "gw")]
    Gw,
    #[serde(rename = "kernel-equiv")]
    KernelEquiv,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Simulate,
        ExperimentKind::Sweep,
        ExperimentKind::VerifyBond,
        ExperimentKind::VerifySite,
        ExperimentKind::VerifyZero,
        ExperimentKind::ZeroFn,
        ExperimentKind::Counterexample,
        ExperimentKind::Gw,
        ExperimentKind::KernelEquiv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::VerifyBond => "verify-bond",
            ExperimentKind::VerifySite => "verify-site",
            ExperimentKind::VerifyZero => "verify-zero",
            ExperimentKind::ZeroFn => "zerofn",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::Gw => "gw",
            ExperimentKind::KernelEquiv => "kernel-equiv",
        }
    }

    fn aliases(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::VerifyBond => &["verify-1.1"],
            ExperimentKind::VerifySite => &["verify-1.2"],
            ExperimentKind::VerifyZero => &["verify-3.1"],
            _ => &[],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s || k.aliases().contains(&s))
            .ok_or_else(|| format!("unknown experiment kind {s:?}"))
    }
}

/// A number written either as a TOML number or as a string such as `"3/5"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    pub fn rational(&self, field: &str) -> Result<Rational, CliError> {
        let parsed = match self {
            Num::Int(n) => Ok(Rational::from_integer((*n).into())),
            // The shortest decimal that round-trips, so `0.3` means 3/10.
            Num::Float(x) => parse_rational(&x.to_string()),
            Num::Text(s) => parse_rational(s),
        };
        parsed.map_err(|e| CliError::field(field, e.to_string()))
    }

    pub fn f64(&self, field: &str) -> Result<f64, CliError> {
        match self {
            Num::Int(n) => Ok(*n as f64),
            Num::Float(x) => Ok(*x),
            Num::Text(_) => Ok(percoweave_core::rational::to_f64(&self.rational(field)?)),
        }
    }
}

impl From<&str> for Num {
    fn from(s: &str) -> Self {
        Num::Text(s.to_string())
    }
}

fn rationals(values: &[Num], field: &str) -> Result<Vec<Rational>, CliError> {
    values.iter().enumerate().map(|(i, v)| v.rational(&format!("{field}[{i}]"))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Lattice {
        side: usize,
        #[serde(default = "default_boundary")]
        boundary: Boundary,
    },
    Tree {
        d: usize,
        depth: u32,
    },
    Edges {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<usize>,
        edges: Vec<(usize, usize)>,
    },
    File {
        path: PathBuf,
    },
    Counterexample,
}

fn default_boundary() -> Boundary {
    Boundary::Box
}

impl GraphSpec {
    pub fn build(&self) -> Result<DirectedGraph, CliError> {
        let g = match self {
            GraphSpec::Lattice { side, boundary } => DirectedGraph::square_lattice(*side, *boundary),
            GraphSpec::Tree { d, depth } => DirectedGraph::rooted_tree(*d, *depth),
            GraphSpec::Edges { vertices, edges } => DirectedGraph::from_edges(*vertices, edges, false),
            GraphSpec::File { path } => DirectedGraph::load_edge_list(path),
            GraphSpec::Counterexample => Ok(DirectedGraph::counterexample()),
        };
        g.map_err(|e| CliError::field("graph", e.to_string()))
    }

    /// Short identifier used in CSV rows.
    pub fn id(&self) -> String {
        match self {
            GraphSpec::Lattice { side, boundary: Boundary::Box } => format!("L{side}"),
            GraphSpec::Lattice { side, boundary: Boundary::Torus } => format!("T{side}"),
            GraphSpec::Tree { d, depth } => format!("tree-d{d}-k{depth}"),
            GraphSpec::Edges { edges, .. } => format!("edges-m{}", edges.len()),
            GraphSpec::File { path } => path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            GraphSpec::Counterexample => "counterexample".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    /// `atoms = [[value, prob], ...]`.
    Discrete { atoms: Vec<(Num, Num)> },
    Uniform { lo: f64, hi: f64 },
    Point { value: Num },
}

impl MarginalSpec {
    fn build(&self, field: &str) -> Result<Marginal, CliError> {
        let m = match self {
            MarginalSpec::Discrete { atoms } => {
                let atoms = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, (v, p))| Ok((v.rational(&format!("{field}.atoms[{i}]"))?, p.rational(&format!("{field}.atoms[{i}]"))?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Marginal::discrete(atoms)
            }
            MarginalSpec::Uniform { lo, hi } => Marginal::uniform(*lo, *hi),
            MarginalSpec::Point { value } => Marginal::point(value.rational(&format!("{field}.value"))?),
        };
        m.map_err(|e| CliError::field(field, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    /// `atoms = [[w, w_bar, prob], ...]`.
    Discrete { atoms: Vec<(Num, Num, Num)> },
    PointMass { w: Num, w_bar: Num },
    Site { p: Num },
    IdenticalUniform { a: f64 },
    Product { w: MarginalSpec, w_bar: MarginalSpec },
}

impl LawSpec {
    pub fn build(&self, field: &str) -> Result<WeightLaw, CliError> {
        let law = match self {
            LawSpec::Discrete { atoms } => {
                let triples = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, (w, wb, p))| {
                        let f = format!("{field}.atoms[{i}]");
                        Ok((w.rational(&f)?, wb.rational(&f)?, p.rational(&f)?))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                WeightLaw::from_triples(&triples)
            }
            LawSpec::PointMass { w, w_bar } => {
                WeightLaw::point_mass(w.rational(&format!("{field}.w"))?, w_bar.rational(&format!("{field}.w_bar"))?)
            }
            LawSpec::Site { p } => WeightLaw::site(&p.rational(&format!("{field}.p"))?),
            LawSpec::IdenticalUniform { a } => WeightLaw::identical_uniform(*a),
            LawSpec::Product { w, w_bar } => {
                Ok(WeightLaw::product(w.build(&format!("{field}.w"))?, w_bar.build(&format!("{field}.w_bar"))?))
            }
        };
        law.map_err(|e| CliError::field(field, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawOverride {
    pub vertex: usize,
    pub law: LawSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Product,
    Exponential { alpha: f64 },
    Geometric { beta: Num },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel, CliError> {
        let k = match self {
            KernelSpec::Product => Ok(Kernel::Product),
            KernelSpec::Exponential { alpha } => Kernel::exponential(*alpha),
            KernelSpec::Geometric { beta } => Kernel::geometric(beta.rational("kernel.beta")?),
        };
        k.map_err(|e| CliError::field("kernel", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CollectionSpec {
    AllPaths { source: usize, target: usize },
    Boundary { source: usize, targets: Vec<usize> },
    /// Lattice origin to the frame of the box.
    BoxBoundary,
    /// Tree root to the deepest generation.
    Leaves,
    /// Paths given as vertex sequences.
    Explicit { paths: Vec<Vec<usize>> },
}

impl CollectionSpec {
    pub fn build(&self, graph: &DirectedGraph) -> Result<PathCollection, CliError> {
        let err = |e: percoweave_core::paths::PathError| CliError::field("collection", e.to_string());
        match self {
            CollectionSpec::AllPaths { source, target } => PathCollection::all_paths_between(graph, *source, *target).map_err(err),
            CollectionSpec::Boundary { source, targets } => {
                PathCollection::boundary_reaching(graph, *source, targets.clone()).map_err(err)
            }
            CollectionSpec::BoxBoundary => {
                let origin = graph.origin().ok_or_else(|| CliError::field("collection", "box_boundary needs a lattice graph"))?;
                PathCollection::boundary_reaching(graph, origin, graph.box_boundary()).map_err(err)
            }
            CollectionSpec::Leaves => {
                let depth = (0..)
                    .take_while(|&g| !graph.generation(g).is_empty())
                    .last()
                    .filter(|&g| g > 0)
                    .ok_or_else(|| CliError::field("collection", "leaves needs a rooted tree"))?;
                PathCollection::boundary_reaching(graph, 0, graph.generation(depth)).map_err(err)
            }
            CollectionSpec::Explicit { paths } => {
                let paths = paths
                    .iter()
                    .map(|vs| match vs.as_slice() {
                        [v] => Ok(Path::trivial(*v)),
                        _ => Path::from_vertices(graph, vs).map_err(err),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                PathCollection::explicit(paths).map_err(err)
            }
        }
    }
}

/// The comparison model for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelChoice {
    Weighted,
    Bond { p: f64 },
    Site { p: f64 },
}

/// Random instance corpus for the verification kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub instances: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Subset of `product`, `exponential`, `geometric`; all three by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub sides: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroFnSpec {
    /// Largest `|A|` (length of `x`).
    pub max_a: usize,
    /// Largest `|B|` (length of `y`).
    pub max_b: usize,
    /// Coordinate grid shared by `x` and `y`.
    pub grid: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GwSpec {
    /// Explicit offspring probabilities `p_0, p_1, ...`; otherwise derived from `law` and `d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offspring: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Depth for the tree Monte Carlo comparison; skipped when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReparamSpec {
    pub w_grid: Vec<Num>,
    pub w_bar_grid: Vec<Num>,
    pub alpha: f64,
    pub beta: Num,
    #[serde(default = "default_multiplicity")]
    pub multiplicity: usize,
}

fn default_multiplicity() -> usize {
    2
}

fn default_confidence() -> f64 {
    0.95
}

fn default_replications() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment id used for output file names; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Worker threads; available parallelism when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Comparison parameter for the bond and site checks; the hypothesis value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub law_overrides: Vec<LawOverride>,
    /// Second law for the zero-function kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law_b: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub law_b_overrides: Vec<LawOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection: Option<CollectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zerofn: Option<ZeroFnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gw: Option<GwSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reparam: Option<ReparamSpec>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &FsPath) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// SHA-256 of the canonical serialization, hex encoded. Thread count and
    /// output directory do not change results and are left out.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig { threads: None, out_dir: None, ..self.clone() };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn experiment_id(&self, kind: ExperimentKind) -> String {
        self.name.clone().unwrap_or_else(|| kind.name().to_string())
    }

    pub fn graph(&self) -> Result<DirectedGraph, CliError> {
        self.graph.as_ref().ok_or_else(|| CliError::field("graph", "missing"))?.build()
    }

    pub fn law(&self) -> Result<WeightLaw, CliError> {
        self.law.as_ref().ok_or_else(|| CliError::field("law", "missing"))?.build("law")
    }

    pub fn laws(&self) -> Result<LawMap, CliError> {
        law_map(self.law()?, &self.law_overrides, "law_overrides")
    }

    pub fn laws_b(&self) -> Result<LawMap, CliError> {
        let law = self.law_b.as_ref().ok_or_else(|| CliError::field("law_b", "missing"))?.build("law_b")?;
        law_map(law, &self.law_b_overrides, "law_b_overrides")
    }

    pub fn kernel(&self) -> Result<Kernel, CliError> {
        self.kernel.as_ref().map_or(Ok(Kernel::Product), KernelSpec::build)
    }

    pub fn p(&self) -> Result<Option<Rational>, CliError> {
        self.p.as_ref().map(|p| p.rational("p")).transpose()
    }

    /// Checks scalar fields that serde cannot.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.replications == 0 {
            return Err(CliError::field("replications", "must be positive"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(CliError::field("confidence", "must lie in (0, 1)"));
        }
        if self.threads == Some(0) {
            return Err(CliError::field("threads", "must be positive"));
        }
        if let Some(law) = &self.law {
            law.build("law")?;
        }
        if let Some(law) = &self.law_b {
            law.build("law_b")?;
        }
        self.kernel()?;
        self.p()?;
        Ok(())
    }
}

fn law_map(default: WeightLaw, overrides: &[LawOverride], field: &str) -> Result<LawMap, CliError> {
    let mut map = LawMap::uniform(default);
    for (i, o) in overrides.iter().enumerate() {
        map.set(o.vertex, o.law.build(&format!("{field}[{i}].law"))?);
    }
    Ok(map)
}

pub(crate) fn grid(values: &[Num], field: &str) -> Result<Vec<Rational>, CliError> {
    rationals(values, field)
}
