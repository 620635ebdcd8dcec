use std::path::PathBuf;
use std::process::ExitCode;

use branchlab_cli::{run_scenario, CliError, Command, RawScenario, RunOptions};
use clap::Parser;

/// Exact branch statistics for repeated quantum measurements.
#[derive(Debug, Parser)]
#[command(name = "branchlab", version)]
struct Args {
    /// typicality | branch-stats | validity-feasibility | validity-joint |
    /// achievable-set | collapse-sample | chain-demo
    command: Command,
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Outcome weights, e.g. "1/3,2/3".
    #[arg(long)]
    q: Option<String>,
    /// Second distribution for validity-joint.
    #[arg(long)]
    q_b: Option<String>,
    /// Number of runs N; a comma-separated ascending list where allowed.
    #[arg(long)]
    n_runs: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    k_cap: Option<String>,
    /// Where results.csv, results.json and plots are written.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for exact weight sums (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> Result<(), CliError> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Schema(format!("--threads: {e}")))?;
    }
    let mut raw = match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            RawScenario::parse(&text)?
        }
        None => RawScenario::default(),
    };
    for (key, value) in [
        ("q", &args.q),
        ("q_b", &args.q_b),
        ("N", &args.n_runs),
        ("epsilon", &args.epsilon),
        ("delta", &args.delta),
        ("seed", &args.seed),
        ("k_cap", &args.k_cap),
    ] {
        if let Some(v) = value {
            raw.set(key, v.clone())?;
        }
    }
    let config = raw.validate(Some(args.command))?;
    let bundle = run_scenario(&config, &RunOptions::from_env()?)?;
    bundle.write_to(&args.out_dir)?;
    print!("{}", bundle.csv());
    if let Some(t) = &bundle.transcript {
        print!("{t}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("branchlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
