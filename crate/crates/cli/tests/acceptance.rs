//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines appear in `cargo test` output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use percoweave::{resolve, run_experiment, ExperimentConfig, ExperimentKind, RunOptions, RunOutcome, RunStatus};
use percoweave_core::branching::{compare_tree_mc, gw_extinction, offspring_law, OffspringLaw};
use percoweave_core::engine::{
    estimate_event, estimate_expected_cluster_size, sample_configuration, sample_site, EstimateWithCI, Model,
};
use percoweave_core::oracle::{
    check_kernel_reparametrization, exact_event_probability, random_instance, reproduce_counterexample,
    verify_cluster_size_bound, KernelChoice, Verdict,
};
use percoweave_core::rational::{frac, int, Rational};
use percoweave_core::stochastics::{Kernel, LawMap, ReplicationStream, WeightLaw};
use percoweave_core::{Boundary, DirectedGraph};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Check = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_config(file: &str, kind: ExperimentKind, out: &Path) -> Result<RunOutcome, String> {
    let config = ExperimentConfig::load(&configs().join(file)).map_err(|e| e.to_string())?;
    let opts = RunOptions { out_dir: Some(out.to_path_buf()), ..Default::default() };
    let config = resolve(config, kind, &opts).map_err(|e| e.to_string())?;
    run_experiment(&config).map_err(|e| e.to_string())
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn counterexample() -> Check {
    let start = Instant::now();
    let r = reproduce_counterexample().map_err(|e| e.to_string())?;
    if r.p_a.value != frac(3, 10) || r.p_b.value != frac(1, 5) || !r.p_a.exact || !r.p_b.exact {
        return Err(format!("got {} and {}", r.p_a, r.p_b));
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let outcome = run_config("counterexample.toml", ExperimentKind::Counterexample, dir.path())?;
    let text = fs::read_to_string(outcome.written.text.ok_or("no report file")?).map_err(|e| e.to_string())?;
    if !text.contains("= 3/10") || !text.contains("= 1/5") || outcome.status != RunStatus::Success {
        return Err(format!("report file lacks the exact values:\n{text}"));
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("P^(a) = 3/10, P^(b) = 1/5 exactly in {:.2?}", start.elapsed()))
}

/// Every verdict of a 200-instance corpus holds.
fn falsification(file: &str, kind: ExperimentKind) -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let outcome = run_config(file, kind, dir.path())?;
    let records = outcome.artifacts.records();
    if records.len() != 200 {
        return Err(format!("{} records", records.len()));
    }
    let bad: Vec<_> = records.iter().filter(|r| r["verdict"] != "holds").collect();
    if let Some(r) = bad.first() {
        return Err(format!("{} instances fail, first: {}", bad.len(), serde_json::Value::Object((*r).clone())));
    }
    let rounded = records.iter().filter(|r| r["exact"] == false).count();
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("200/200 hold ({rounded} compared at 1e-12, the rest exactly) in {:.2?}", start.elapsed()))
}

fn oracle_sampler() -> Check {
    let start = Instant::now();
    let mut inside = 0;
    let mut misses = Vec::new();
    for i in 0..50 {
        let inst = random_instance(404, i, &KernelChoice::ALL);
        let exact = exact_event_probability(&inst.graph, &inst.exact_model(), &inst.collection).map_err(|e| e.to_string())?;
        let model = inst.model().map_err(|e| e.to_string())?;
        let mc = estimate_event(&inst.graph, &model, &inst.collection, 10_000, 0.99, 1000 + i).map_err(|e| e.to_string())?;
        if mc.contains(exact.to_f64()) {
            inside += 1;
        } else {
            misses.push(format!("#{i}: {} vs [{}, {}]", exact, mc.ci_low, mc.ci_high));
        }
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    if inside < 48 {
        return Err(format!("{inside}/50 inside; misses {misses:?}"));
    }
    Ok(format!("{inside}/50 exact values inside the 99% interval in {:.2?}", start.elapsed()))
}

fn estimates(outcome: &RunOutcome) -> Vec<EstimateWithCI> {
    outcome
        .artifacts
        .records()
        .iter()
        .map(|r| &r["estimate"])
        .map(|v| EstimateWithCI {
            estimate: v["estimate"].as_f64().unwrap(),
            ci_low: v["ci_low"].as_f64().unwrap(),
            ci_high: v["ci_high"].as_f64().unwrap(),
            half_width: v["half_width"].as_f64().unwrap(),
            std_error: v["std_error"].as_f64().unwrap(),
            confidence: v["confidence"].as_f64().unwrap(),
            replications: v["replications"].as_u64().unwrap(),
            seed: v["seed"].as_u64().unwrap(),
        })
        .collect()
}

fn sweep() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let low = estimates(&run_config("sweep-subcritical.toml", ExperimentKind::Sweep, dir.path())?);
    let high = estimates(&run_config("sweep-supercritical.toml", ExperimentKind::Sweep, dir.path())?);
    let lo: Vec<f64> = low.iter().map(|e| e.estimate).collect();
    let hi: Vec<f64> = high.iter().map(|e| e.estimate).collect();
    if lo.len() != 3 || hi.len() != 3 {
        return Err("expected three box sizes".into());
    }
    if !lo.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("a=0.30 not strictly decreasing: {lo:?}"));
    }
    if hi.iter().any(|&e| e < 0.2) {
        return Err(format!("a=0.60 estimate below 0.2: {hi:?}"));
    }
    for i in 0..3 {
        for j in i + 1..3 {
            let sd = (high[i].std_error.powi(2) + high[j].std_error.powi(2)).sqrt();
            if (hi[i] - hi[j]).abs() > 3.0 * sd {
                return Err(format!("a=0.60 boxes {i} and {j} differ by more than 3 sigma: {hi:?}"));
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("a=0.30 {lo:?} decreasing; a=0.60 {hi:?} stable, in {:.2?}", start.elapsed()))
}

fn cluster_size() -> Check {
    let start = Instant::now();
    let mut checked = 0;
    for i in 0.. {
        if checked == 20 {
            break;
        }
        let inst = random_instance(606, i, &[KernelChoice::Product]);
        let m = inst.law.exact_moments().expect("discrete");
        if m.e_wwbar < &m.e_w * &m.e_wbar {
            continue;
        }
        let r = verify_cluster_size_bound(&inst.graph, &inst.law, 0).map_err(|e| format!("{inst}: {e}"))?;
        if r.verdict != Verdict::Holds || !r.exact() {
            return Err(format!("{inst}: {} vs {}", r.lhs, r.rhs));
        }
        checked += 1;
    }
    let g = DirectedGraph::square_lattice(20, Boundary::Box).map_err(|e| e.to_string())?;
    let o = g.origin().expect("lattice origin");
    let a: f64 = 0.3;
    let p = (1.0 + a + a * a) / 3.0;
    let law = WeightLaw::identical_uniform(a).map_err(|e| e.to_string())?;
    let weighted = Model::weighted(LawMap::uniform(law), Kernel::Product).map_err(|e| e.to_string())?;
    let w = estimate_expected_cluster_size(&g, &weighted, o, 10_000, 0.95, 61).map_err(|e| e.to_string())?;
    let b = estimate_expected_cluster_size(&g, &Model::bond(p).map_err(|e| e.to_string())?, o, 10_000, 0.95, 62)
        .map_err(|e| e.to_string())?;
    let sd = (w.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    if w.estimate > b.estimate + 3.0 * sd {
        return Err(format!("20x20: weighted {} exceeds bond {} by more than 3 sigma", w.estimate, b.estimate));
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "20 exact instances hold; 20x20 E|C| weighted {:.3} vs bond {:.3} in {:.2?}",
        w.estimate,
        b.estimate,
        start.elapsed()
    ))
}

fn branching() -> Check {
    let start = Instant::now();
    for i in 0..50 {
        let law = random_instance(707, i, &[KernelChoice::Product]).law;
        let d = 1 + (i as usize % 4);
        let o = offspring_law(&law, d).map_err(|e| e.to_string())?;
        let mean: Rational = o.probs.iter().enumerate().map(|(j, p)| p * int(j as i64)).sum();
        if mean != int(d as i64) * law.exact_moments().expect("discrete").e_wwbar {
            return Err(format!("mean identity fails for law #{i}"));
        }
    }
    let o = OffspringLaw::from_probabilities(vec![frac(1, 4), int(0), frac(3, 4)]).map_err(|e| e.to_string())?;
    let q = gw_extinction(&o).map_err(|e| e.to_string())?.extinction;
    if (q - 1.0 / 3.0).abs() > 1e-12 {
        return Err(format!("extinction {q}"));
    }
    let site = WeightLaw::site(&frac(3, 4)).map_err(|e| e.to_string())?;
    let t = compare_tree_mc(&site, 2, 4, 10_000, 0.95, 77).map_err(|e| e.to_string())?;
    if !t.within(3.0) {
        return Err(format!("tree {} vs {} (z = {:.2})", t.conditioned.estimate, t.gw_value, t.z_score));
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "50 mean identities exact; q = {q:.15}; tree {} vs {:.5} (z = {:.2}) in {:.2?}",
        t.conditioned.estimate,
        t.gw_value,
        t.z_score,
        start.elapsed()
    ))
}

fn sampler_identities() -> Check {
    const N: u64 = 100_000;
    let star = DirectedGraph::from_edges(None, &[(0, 1), (0, 2), (0, 3)], false).map_err(|e| e.to_string())?;
    let law = WeightLaw::point_mass(frac(4, 5), frac(1, 2)).map_err(|e| e.to_string())?;
    let model = Model::weighted(LawMap::uniform(law), Kernel::Product).map_err(|e| e.to_string())?;
    let mut counts = [0u64; 8];
    for r in 0..N {
        let c = sample_configuration(&star, &model, &ReplicationStream::new(81, r), false).map_err(|e| e.to_string())?;
        counts[(0..3).fold(0, |m, e| m | (c.is_open(e) as usize) << e)] += 1;
    }
    let p: f64 = 0.4;
    let chi2: f64 = counts
        .iter()
        .enumerate()
        .map(|(mask, &obs)| {
            let k = (mask as u32).count_ones() as i32;
            let expected = N as f64 * p.powi(k) * (1.0 - p).powi(3 - k);
            (obs as f64 - expected).powi(2) / expected
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new(7.0).expect("dof").cdf(chi2);
    if p_value <= 0.001 {
        return Err(format!("chi-square p-value {p_value}"));
    }

    let edge = DirectedGraph::from_edges(None, &[(0, 1)], false).map_err(|e| e.to_string())?;
    let ps = 0.6;
    let mut open = 0u64;
    for r in 0..N {
        open += sample_site(&edge, ps, &ReplicationStream::new(82, r)).map_err(|e| e.to_string())?.is_open(0) as u64;
    }
    let density = open as f64 / N as f64;
    let target = ps * ps;
    if (density - target).abs() > 3.0 * (target * (1.0 - target) / N as f64).sqrt() {
        return Err(format!("site density {density} vs {target}"));
    }

    let pair = DirectedGraph::from_edges(None, &[(0, 1), (2, 3)], false).map_err(|e| e.to_string())?;
    let uniform = Model::weighted(
        LawMap::uniform(WeightLaw::identical_uniform(0.1).map_err(|e| e.to_string())?),
        Kernel::Product,
    )
    .map_err(|e| e.to_string())?;
    let (mut a, mut b, mut ab) = (0u64, 0u64, 0u64);
    for r in 0..N {
        let c = sample_configuration(&pair, &uniform, &ReplicationStream::new(83, r), false).map_err(|e| e.to_string())?;
        a += c.is_open(0) as u64;
        b += c.is_open(1) as u64;
        ab += (c.is_open(0) && c.is_open(1)) as u64;
    }
    let n = N as f64;
    let (pa, pb, pab) = (a as f64 / n, b as f64 / n, ab as f64 / n);
    let cov = pab - pa * pb;
    // Delta-method standard error of the covariance estimator under independence.
    let se = (pa * (1.0 - pa) * pb * (1.0 - pb) / n).sqrt();
    if cov.abs() > 4.0 * se {
        return Err(format!("disjoint-edge covariance {cov} exceeds 4 sigma ({se})"));
    }
    Ok(format!("chi-square p = {p_value:.3}; site density {density:.4} vs {target}; disjoint covariance {cov:.2e} (se {se:.1e})"))
}

fn reparametrization() -> Check {
    let grid: Vec<Rational> = vec![int(0), frac(1, 4), frac(1, 2), int(1), int(2)];
    let r = check_kernel_reparametrization(&grid, &grid, 2.0, &int(1), 2).map_err(|e| e.to_string())?;
    if r.marginals.len() != 25 || r.max_marginal_error >= 1e-10 {
        return Err(format!("marginal error {:e} over {} points", r.max_marginal_error, r.marginals.len()));
    }
    let one = check_kernel_reparametrization(&[int(1)], &[int(1)], 1.0, &int(1), 2).map_err(|e| e.to_string())?;
    let j = &one.joints[0];
    let (geometric, mixture) = j.all_open();
    if geometric != frac(1, 4) || mixture != frac(1, 3) || j.total_variation <= int(0) {
        return Err(format!("joint all-open {geometric} vs {mixture}, TV {}", j.total_variation));
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let outcome = run_config("kernel-equiv.toml", ExperimentKind::KernelEquiv, dir.path())?;
    if outcome.written.jsonl.is_none() {
        return Err("no report written".into());
    }
    Ok(format!(
        "marginal error {:.1e} on 5x5; m=2 all-open 1/4 (closed form) vs 1/3 (mixture), TV {}",
        r.max_marginal_error,
        percoweave_core::rational::render(&j.total_variation)
    ))
}

fn performance() -> Check {
    let g = DirectedGraph::square_lattice(200, Boundary::Box).map_err(|e| e.to_string())?;
    let c = percoweave_core::paths::PathCollection::boundary_reaching(&g, g.origin().expect("origin"), g.box_boundary())
        .map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for a in [0.3, 0.6] {
        let law = WeightLaw::identical_uniform(a).map_err(|e| e.to_string())?;
        let model = Model::weighted(LawMap::uniform(law), Kernel::Product).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let e = estimate_event(&g, &model, &c, 10_000, 0.95, 100).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        within(elapsed, Duration::from_secs(10))?;
        report.push(format!("a={a}: {elapsed:.2?} (estimate {:.4})", e.estimate));
    }
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    Ok(format!("10^4 replications on 200x200, {} on {threads} thread(s)", report.join(", ")))
}

fn strip_timestamps(path: &Path) -> Result<String, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    Ok(text
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).expect("json line");
            v.as_object_mut().expect("object").remove("timestamp");
            v.to_string()
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

fn determinism() -> Check {
    let mut compared = 0;
    for (file, kind) in [
        ("sweep-subcritical.toml", ExperimentKind::Sweep),
        ("simulate-box.toml", ExperimentKind::Simulate),
        ("verify-bond.toml", ExperimentKind::VerifyBond),
        ("gw.toml", ExperimentKind::Gw),
        ("zerofn.toml", ExperimentKind::ZeroFn),
    ] {
        let mut outputs = Vec::new();
        for threads in [1, 3] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let config = ExperimentConfig::load(&configs().join(file)).map_err(|e| e.to_string())?;
            let opts = RunOptions { out_dir: Some(dir.path().to_path_buf()), threads: Some(threads), ..Default::default() };
            let config = resolve(config, kind, &opts).map_err(|e| e.to_string())?;
            let outcome = run_experiment(&config).map_err(|e| e.to_string())?;
            let csv = fs::read(outcome.written.csv.as_ref().ok_or("no csv")?).map_err(|e| e.to_string())?;
            let jsonl = strip_timestamps(outcome.written.jsonl.as_ref().ok_or("no jsonl")?)?;
            outputs.push((csv, jsonl));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{file}: outputs differ between runs"));
        }
        compared += 1;
    }
    Ok(format!("{compared} experiments byte-identical across reruns with 1 and 3 worker threads"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("counterexample exactness", counterexample),
        ("bond upper bound falsification", || falsification("verify-bond.toml", ExperimentKind::VerifyBond)),
        ("site lower bound falsification", || falsification("verify-site.toml", ExperimentKind::VerifySite)),
        ("oracle and sampler agree", oracle_sampler),
        ("boundary survival sweep", sweep),
        ("expected cluster size bound", cluster_size),
        ("branching consistency", branching),
        ("sampler distributional identities", sampler_identities),
        ("kernel reparametrization report", reparametrization),
        ("performance", performance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
