use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use percoweave::{describe, resolve, run_experiment, CliError, ExperimentConfig, ExperimentKind, RunOptions};

#[derive(Debug, Parser)]
#[command(name = "percoweave", version, about = "Weighted directed percolation experiments")]
struct Args {
    /// simulate, sweep, verify-bond (verify-1.1), verify-site (verify-1.2),
    /// verify-zero (verify-3.1), zerofn, counterexample, gw or kernel-equiv.
    subcommand: ExperimentKind,
    /// Experiment config (TOML). Optional for `counterexample`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Edge list (`tail head` per line) replacing the config's graph.
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Print the resolved plan and exit without computing.
    #[arg(long)]
    describe: bool,
}

fn run(args: Args) -> Result<u8, CliError> {
    let config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if args.subcommand == ExperimentKind::Counterexample => ExperimentConfig::parse("")?,
        None => return Err(CliError::Usage("--config is required".into())),
    };
    let opts = RunOptions { seed: args.seed, out_dir: args.out, threads: args.threads, graph_file: args.graph_file };
    let config = resolve(config, args.subcommand, &opts)?;
    if args.describe {
        print!("{}", describe(&config)?);
        return Ok(0);
    }
    let outcome = run_experiment(&config)?;
    println!("{}", outcome.summary);
    for path in [&outcome.written.csv, &outcome.written.jsonl, &outcome.written.text].into_iter().flatten() {
        println!("wrote {}", path.display());
    }
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
