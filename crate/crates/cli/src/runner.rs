//! Dispatch of a validated config to the engines.

use std::fmt::Write as _;
use std::path::PathBuf;

use percoweave_core::branching::{compare_tree_mc, gw_extinction, offspring_law, OffspringLaw};
use percoweave_core::engine::{boundary_survival_sweep, estimate_event, EstimateWithCI, Model};
use percoweave_core::oracle::{
    check_kernel_reparametrization, compare_zero_functions, default_bond_parameter, random_instance,
    render_law, reproduce_counterexample, verify_bond_upper_bound, verify_site_lower_bound,
    verify_zero_function_comparison, CheckRecord, ExactProbability, KernelChoice, OracleError, Verdict,
};
use percoweave_core::rational::{render, to_f64, Rational};
use percoweave_core::stochastics::{Kernel, LawMap, WeightLaw};
use percoweave_core::DirectedGraph;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{grid, CollectionSpec, ExperimentConfig, ExperimentKind, GraphSpec, ModelChoice};
use crate::output::{Artifacts, Written, ESTIMATE_HEADER};
use crate::CliError;

const VERIFY_HEADER: [&str; 9] = ["experiment", "spec_hash", "instance", "instance_hash", "verdict", "lhs", "rhs", "p", "slack"];

/// Overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub graph_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    /// At least one verification verdict was violated.
    Violation,
}

impl RunStatus {
    pub fn exit_code(self) -> u8 {
        match self {
            RunStatus::Success => 0,
            RunStatus::Violation => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub artifacts: Artifacts,
    pub written: Written,
    /// One-line human summary.
    pub summary: String,
}

/// Resolves the effective config: the subcommand must agree with `kind`, and
/// command-line overrides replace file values.
pub fn resolve(mut config: ExperimentConfig, kind: ExperimentKind, opts: &RunOptions) -> Result<ExperimentConfig, CliError> {
    if let Some(k) = config.kind {
        if k != kind {
            return Err(CliError::Usage(format!("config is for `{k}` but the subcommand is `{kind}`")));
        }
    }
    config.kind = Some(kind);
    if let Some(s) = opts.seed {
        config.seed = s;
    }
    if let Some(t) = opts.threads {
        config.threads = Some(t);
    }
    if let Some(d) = &opts.out_dir {
        config.out_dir = Some(d.clone());
    }
    if let Some(f) = &opts.graph_file {
        config.graph = Some(GraphSpec::File { path: f.clone() });
    }
    config.validate()?;
    Ok(config)
}

/// Runs the experiment and writes its artifacts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let kind = config.kind.ok_or_else(|| CliError::field("kind", "missing"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Run(e.to_string()))?;
    let id = config.experiment_id(kind);
    let hash = config.hash();
    let (status, artifacts, summary) = pool.install(|| match kind {
        ExperimentKind::Simulate => simulate(config, id, hash),
        ExperimentKind::Sweep => sweep(config, id, hash),
        ExperimentKind::VerifyBond | ExperimentKind::VerifySite | ExperimentKind::VerifyZero => verify(config, kind, id, hash),
        ExperimentKind::ZeroFn => zerofn(config, id, hash),
        ExperimentKind::Counterexample => counterexample(id, hash),
        ExperimentKind::Gw => gw(config, id, hash),
        ExperimentKind::KernelEquiv => kernel_equiv(config, id, hash),
    })?;
    let dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let written = artifacts.write(&dir)?;
    Ok(RunOutcome { status, artifacts, written, summary })
}

type Produced = Result<(RunStatus, Artifacts, String), CliError>;

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

fn estimate_cells(graph: String, e: &EstimateWithCI) -> Vec<String> {
    vec![
        graph,
        e.estimate.to_string(),
        e.ci_low.to_string(),
        e.ci_high.to_string(),
        e.replications.to_string(),
        e.seed.to_string(),
    ]
}

fn default_collection(config: &ExperimentConfig) -> Result<CollectionSpec, CliError> {
    match (&config.collection, &config.graph) {
        (Some(c), _) => Ok(c.clone()),
        (None, Some(GraphSpec::Lattice { .. })) => Ok(CollectionSpec::BoxBoundary),
        (None, Some(GraphSpec::Tree { .. })) => Ok(CollectionSpec::Leaves),
        _ => Err(CliError::field("collection", "missing")),
    }
}

fn model(config: &ExperimentConfig) -> Result<Model, CliError> {
    match config.model.as_ref().unwrap_or(&ModelChoice::Weighted) {
        ModelChoice::Weighted => Model::weighted(config.laws()?, config.kernel()?),
        ModelChoice::Bond { p } => Model::bond(*p),
        ModelChoice::Site { p } => Model::site(*p),
    }
    .map_err(|e| CliError::field("model", e.to_string()))
}

fn simulate(config: &ExperimentConfig, id: String, hash: String) -> Produced {
    let graph = config.graph()?;
    let collection = default_collection(config)?.build(&graph)?;
    let m = model(config)?;
    let e = estimate_event(&graph, &m, &collection, config.replications, config.confidence, config.seed).map_err(run_err)?;
    let gid = config.graph.as_ref().map(GraphSpec::id).unwrap_or_default();
    let mut a = Artifacts::new(id, hash, &ESTIMATE_HEADER);
    a.row(estimate_cells(gid.clone(), &e));
    a.record(json!({ "graph": gid, "estimate": e }));
    let summary = format!("P = {} [{}, {}] over {} replications", e.estimate, e.ci_low, e.ci_high, e.replications);
    Ok((RunStatus::Success, a, summary))
}

fn sweep(config: &ExperimentConfig, id: String, hash: String) -> Produced {
    let sides = &config.sweep.as_ref().ok_or_else(|| CliError::field("sweep", "missing"))?.sides;
    let points = boundary_survival_sweep(&config.law()?, &config.kernel()?, sides, config.replications, config.confidence, config.seed)
        .map_err(|e| CliError::field("sweep", e.to_string()))?;
    let mut a = Artifacts::new(id, hash, &ESTIMATE_HEADER);
    for p in &points {
        a.row(estimate_cells(format!("L{}", p.side), &p.estimate));
        a.record(json!({ "graph": format!("L{}", p.side), "estimate": p.estimate }));
    }
    let decreasing = points.windows(2).all(|w| w[1].estimate.estimate < w[0].estimate.estimate);
    let shown: Vec<String> = points.iter().map(|p| format!("L{}: {:.4}", p.side, p.estimate.estimate)).collect();
    Ok((RunStatus::Success, a, format!("{} (strictly decreasing: {decreasing})", shown.join(", "))))
}

fn short_hash(s: &str) -> String {
    hex::encode(&Sha256::digest(s.as_bytes())[..8])
}

fn show(p: &ExactProbability) -> String {
    p.to_string()
}

fn push_check(a: &mut Artifacts, index: u64, r: &CheckRecord) {
    let p = r.p.as_ref().map(render).unwrap_or_default();
    let h = short_hash(&r.instance);
    let slack = if r.exact() { render(&r.slack) } else { to_f64(&r.slack).to_string() };
    a.row(vec![index.to_string(), h.clone(), r.verdict.to_string(), show(&r.lhs), show(&r.rhs), p.clone(), slack.clone()]);
    a.record(json!({
        "instance": index,
        "instance_hash": h,
        "description": r.instance,
        "check": format!("{:?}", r.kind),
        "verdict": r.verdict.to_string(),
        "lhs": show(&r.lhs),
        "rhs": show(&r.rhs),
        "exact": r.exact(),
        "p": p,
        "slack": slack,
        "witness": r.witness,
    }));
}

fn push_refusal(a: &mut Artifacts, index: u64, description: &str, reason: &OracleError) {
    let h = short_hash(description);
    a.row(vec![index.to_string(), h.clone(), "refused".into(), String::new(), String::new(), String::new(), String::new()]);
    a.record(json!({ "instance": index, "instance_hash": h, "description": description, "verdict": "refused", "reason": reason.to_string() }));
}

fn kernel_choices(names: Option<&Vec<String>>, kind: ExperimentKind) -> Result<Vec<KernelChoice>, CliError> {
    if kind != ExperimentKind::VerifyBond {
        return Ok(vec![KernelChoice::Product]);
    }
    let Some(names) = names else { return Ok(KernelChoice::ALL.to_vec()) };
    names
        .iter()
        .map(|n| match n.as_str() {
            "product" => Ok(KernelChoice::Product),
            "exponential" => Ok(KernelChoice::Exponential),
            "geometric" => Ok(KernelChoice::Geometric),
            other => Err(CliError::field("corpus.kernels", format!("unknown kernel {other:?}"))),
        })
        .collect()
}

fn check_one(
    kind: ExperimentKind,
    graph: &DirectedGraph,
    laws: &LawMap,
    laws_b: Option<&LawMap>,
    kernel: &Kernel,
    collection: &percoweave_core::paths::PathCollection,
    p: Option<Rational>,
) -> Result<CheckRecord, OracleError> {
    match kind {
        ExperimentKind::VerifyBond => verify_bond_upper_bound(graph, laws, kernel, collection, p),
        ExperimentKind::VerifySite => verify_site_lower_bound(graph, laws, collection, p),
        _ => verify_zero_function_comparison(graph, laws, laws_b.expect("second law"), kernel, collection),
    }
}

fn verify(config: &ExperimentConfig, kind: ExperimentKind, id: String, hash: String) -> Produced {
    let mut a = Artifacts::new(id, hash, &VERIFY_HEADER);
    let mut tally = [0usize; 4];
    let mut count = |v: Option<Verdict>| {
        tally[match v {
            Some(Verdict::Holds) => 0,
            Some(Verdict::Violated) => 1,
            Some(Verdict::PremiseNotMet) => 2,
            None => 3,
        }] += 1
    };
    if let Some(corpus) = &config.corpus {
        let seed = corpus.seed.unwrap_or(config.seed);
        let kernels = kernel_choices(corpus.kernels.as_ref(), kind)?;
        let p = config.p()?;
        for i in 0..corpus.instances {
            let inst = random_instance(seed, i, &kernels);
            let laws_b = (kind == ExperimentKind::VerifyZero)
                .then(|| LawMap::uniform(random_instance(seed ^ 0x9e37_79b9_7f4a_7c15, i, &kernels).law));
            let description = format!("{inst}");
            match check_one(kind, &inst.graph, &inst.laws(), laws_b.as_ref(), &inst.kernel, &inst.collection, p.clone()) {
                Ok(r) => {
                    count(Some(r.verdict));
                    push_check(&mut a, i, &r);
                }
                Err(e) => {
                    count(None);
                    push_refusal(&mut a, i, &description, &e);
                }
            }
        }
    } else {
        let graph = config.graph()?;
        let collection = default_collection(config)?.build(&graph)?;
        let laws_b = if kind == ExperimentKind::VerifyZero { Some(config.laws_b()?) } else { None };
        let r = check_one(kind, &graph, &config.laws()?, laws_b.as_ref(), &config.kernel()?, &collection, config.p()?)
            .map_err(|e| CliError::Run(format!("check refused: {e}")))?;
        count(Some(r.verdict));
        push_check(&mut a, 0, &r);
    }
    let status = if tally[1] > 0 { RunStatus::Violation } else { RunStatus::Success };
    let summary =
        format!("{} holds, {} violated, {} premise not met, {} refused", tally[0], tally[1], tally[2], tally[3]);
    Ok((status, a, summary))
}

fn render_all(v: &[Rational]) -> String {
    v.iter().map(render).collect::<Vec<_>>().join(" ")
}

fn zerofn(config: &ExperimentConfig, id: String, hash: String) -> Produced {
    let spec = config.zerofn.as_ref().ok_or_else(|| CliError::field("zerofn", "missing"))?;
    let grid_values = grid(&spec.grid, "zerofn.grid")?;
    let law_a = config.law()?;
    let law_b = match &config.law_b {
        Some(l) => l.build("law_b")?,
        None => law_a.clone(),
    };
    let kernel = config.kernel()?;
    let cmp = compare_zero_functions(&law_a, &law_b, &kernel, spec.max_a, spec.max_b, &grid_values, &grid_values, true)
        .map_err(run_err)?;
    let mut a = Artifacts::new(id, hash, &["experiment", "spec_hash", "x", "y", "z_a", "z_b"]);
    for r in &cmp.rows {
        a.row(vec![render_all(&r.query.x), render_all(&r.query.y), r.z_a.to_string(), r.z_b.to_string()]);
    }
    let witness = |w: &Option<percoweave_core::oracle::ZeroWitness>| {
        w.as_ref().map(|w| json!({ "query": w.query.to_string(), "z_a": w.z_a.to_string(), "z_b": w.z_b.to_string() }))
    };
    a.record(json!({
        "law_a": render_law(&law_a),
        "law_b": render_law(&law_b),
        "ordering": cmp.ordering.to_string(),
        "evaluated": cmp.evaluated,
        "a_below": witness(&cmp.a_below),
        "b_below": witness(&cmp.b_below),
    }));
    Ok((RunStatus::Success, a, format!("ordering {} over {} queries", cmp.ordering, cmp.evaluated)))
}

fn counterexample(id: String, hash: String) -> Produced {
    let r = reproduce_counterexample().map_err(run_err)?;
    let mut a = Artifacts::new(id, hash, &["experiment", "spec_hash", "quantity", "value"]);
    a.row(vec!["P_a".into(), r.p_a.render()]);
    a.row(vec!["P_b".into(), r.p_b.render()]);
    a.row(vec!["formula_a".into(), render(&r.formula_a)]);
    a.row(vec!["formula_b".into(), render(&r.formula_b)]);
    let witness = r.hoppability.witness.as_ref().map(|w| format!("{w:?}"));
    let below = r.zero.a_below.as_ref().map(|w| format!("{}: z_a = {} < z_b = {}", w.query, w.z_a, w.z_b));
    a.record(json!({
        "p_a": r.p_a.render(),
        "p_b": r.p_b.render(),
        "formula_a": render(&r.formula_a),
        "formula_b": render(&r.formula_b),
        "weakly_hoppable": r.hoppability.weakly_hoppable,
        "hoppability_witness": witness,
        "zero_ordering": r.zero.ordering.to_string(),
        "zero_a_below_b": below,
    }));
    let mut text = String::new();
    writeln!(text, "P^(a)(C) = {}", r.p_a.render()).ok();
    writeln!(text, "P^(b)(C) = {}", r.p_b.render()).ok();
    writeln!(text, "P^(a)(C) > P^(b)(C): {}", r.p_a.value > r.p_b.value).ok();
    writeln!(text, "weakly hoppable: {}", r.hoppability.weakly_hoppable).ok();
    writeln!(text, "zero-function ordering on the grid: {}", r.zero.ordering).ok();
    if let Some(b) = &below {
        writeln!(text, "a below b at {b}").ok();
    }
    a.text = Some(text);
    let summary = format!("P^(a) = {}, P^(b) = {}", r.p_a.render(), r.p_b.render());
    Ok((RunStatus::Success, a, summary))
}

fn gw(config: &ExperimentConfig, id: String, hash: String) -> Produced {
    let spec = config.gw.as_ref().ok_or_else(|| CliError::field("gw", "missing"))?;
    let offspring = match (&spec.offspring, spec.d) {
        (Some(probs), _) => OffspringLaw::from_probabilities(grid(probs, "gw.offspring")?),
        (None, Some(d)) => offspring_law(&config.law()?, d),
        (None, None) => return Err(CliError::field("gw", "needs `offspring` or `d`")),
    }
    .map_err(|e| CliError::field("gw", e.to_string()))?;
    let ext = gw_extinction(&offspring).map_err(run_err)?;
    let mut a = Artifacts::new(id, hash, &ESTIMATE_HEADER);
    a.record(json!({
        "offspring": render_all(&offspring.probs),
        "mean": render(&offspring.mean),
        "extinction": ext.extinction,
        "survival": ext.survival(),
        "iterations": ext.iterations,
        "residual": ext.residual,
    }));
    let mut summary = format!("mean {}, extinction {}", render(&offspring.mean), ext.extinction);
    if let (Some(k), Some(d)) = (spec.k, spec.d) {
        let law: WeightLaw = config.law()?;
        let t = compare_tree_mc(&law, d, k, config.replications, config.confidence, config.seed).map_err(run_err)?;
        let gid = format!("tree-d{d}-k{k}");
        a.row(estimate_cells(format!("{gid}-conditioned"), &t.conditioned));
        a.row(estimate_cells(format!("{gid}-unconditioned"), &t.unconditioned));
        a.record(json!({
            "graph": gid,
            "gw_generation_survival": t.gw_value,
            "conditioned": t.conditioned,
            "unconditioned": t.unconditioned,
            "z_score": t.z_score,
        }));
        write!(summary, "; tree {} vs {} (z = {:.2})", t.conditioned.estimate, t.gw_value, t.z_score).ok();
    }
    Ok((RunStatus::Success, a, summary))
}

fn kernel_equiv(config: &ExperimentConfig, id: String, hash: String) -> Produced {
    let spec = config.reparam.as_ref().ok_or_else(|| CliError::field("reparam", "missing"))?;
    let r = check_kernel_reparametrization(
        &grid(&spec.w_grid, "reparam.w_grid")?,
        &grid(&spec.w_bar_grid, "reparam.w_bar_grid")?,
        spec.alpha,
        &spec.beta.rational("reparam.beta")?,
        spec.multiplicity,
    )
    .map_err(|e| CliError::field("reparam", e.to_string()))?;
    let mut a = Artifacts::new(id, hash, &["experiment", "spec_hash", "w", "w_bar", "closed_form", "quadrature", "abs_error"]);
    for m in &r.marginals {
        a.row(vec![render(&m.w), render(&m.w_bar), m.closed_form.to_string(), m.quadrature.to_string(), m.abs_error.to_string()]);
    }
    for j in &r.joints {
        let (c, b) = j.all_open();
        a.record(json!({
            "w": render(&j.w),
            "w_bar": render(&j.w_bar),
            "multiplicity": j.multiplicity,
            "all_open_geometric": render(&c),
            "all_open_mixture": render(&b),
            "total_variation": render(&j.total_variation),
        }));
    }
    a.record(json!({ "max_marginal_error": r.max_marginal_error, "max_total_variation": render(&r.max_total_variation) }));
    let summary = format!(
        "max marginal error {:e}, max joint total variation {}",
        r.max_marginal_error,
        render(&r.max_total_variation)
    );
    Ok((RunStatus::Success, a, summary))
}

fn trim(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn show_rational(r: &Rational) -> String {
    if r.is_integer() { r.numer().to_string() } else { format!("{} ({})", render(r), trim(to_f64(r))) }
}

/// Human-readable plan: graph size, moments, default comparison parameters and work.
pub fn describe(config: &ExperimentConfig) -> Result<String, CliError> {
    let kind = config.kind.ok_or_else(|| CliError::field("kind", "missing"))?;
    let mut out = String::new();
    writeln!(out, "experiment {} ({kind}), seed {}, config {}", config.experiment_id(kind), config.seed, &config.hash()[..16]).ok();
    let mut edges = None;
    if let Some(spec) = &config.graph {
        let g = spec.build()?;
        writeln!(out, "graph {}: {} vertices, {} edges", spec.id(), g.vertex_count(), g.edge_count()).ok();
        edges = Some(g.edge_count());
    }
    if config.law.is_some() {
        let law = config.law()?;
        let kernel = config.kernel()?;
        writeln!(out, "law {}; kernel {}", law, kernel.name()).ok();
        match law.exact_moments() {
            Some(m) => {
                writeln!(out, "E(W) = {}", show_rational(&m.e_w)).ok();
                writeln!(out, "E(W̄) = {}", show_rational(&m.e_wbar)).ok();
                writeln!(out, "E(W W̄) = {}", show_rational(&m.e_wwbar)).ok();
                match default_bond_parameter(&law, &kernel) {
                    Ok((p, true)) => writeln!(out, "bond bound p = {}", show_rational(&p)).ok(),
                    Ok((p, false)) => writeln!(out, "bond bound p = {}", trim(to_f64(&p))).ok(),
                    Err(e) => writeln!(out, "bond bound p unavailable: {e}").ok(),
                };
                if law.support().within_unit_square() {
                    writeln!(out, "site bound p = {}", show_rational(&m.e_wwbar)).ok();
                }
            }
            None => {
                let m = law.moments();
                writeln!(out, "E(W) = {}", trim(m.e_w)).ok();
                writeln!(out, "E(W̄) = {}", trim(m.e_wbar)).ok();
                writeln!(out, "E(W W̄) = {}", trim(m.e_wwbar)).ok();
                writeln!(out, "bond bound p = {}", trim(kernel.eval_z(m.e_wwbar.max(m.e_w * m.e_wbar)))).ok();
                if law.support().within_unit_square() {
                    writeln!(out, "site bound p = {}", trim(m.e_wwbar)).ok();
                }
            }
        }
    }
    let work = match kind {
        ExperimentKind::Simulate => edges.map(|m| format!("{} replications x {m} edges", config.replications)),
        ExperimentKind::Sweep => config.sweep.as_ref().map(|s| {
            let edge_total: usize = s.sides.iter().map(|l| 4 * l * (l - 1)).sum();
            format!("{} replications x {edge_total} edges over {} boxes", config.replications, s.sides.len())
        }),
        ExperimentKind::VerifyBond | ExperimentKind::VerifySite | ExperimentKind::VerifyZero => {
            Some(match &config.corpus {
                Some(c) => format!("{} exact oracle instances", c.instances),
                None => "1 exact oracle instance".into(),
            })
        }
        ExperimentKind::Gw => config.gw.as_ref().and_then(|g| g.k.zip(g.d)).map(|(k, d)| {
            let vertices: usize = (0..=k).map(|g| d.pow(g)).sum();
            format!("{} replications x {vertices} tree vertices", config.replications)
        }),
        _ => None,
    };
    writeln!(out, "work: {}", work.unwrap_or_else(|| "closed form".into())).ok();
    Ok(out)
}
