use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use relaybeam::{run, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "relaybeam", version, about = "Power control for two-step amplify-and-forward relay networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Trials per power point.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the available cores).
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let Command::Run { config, seed, trials, out, workers } = cli.command;
    let text = std::fs::read_to_string(&config)
        .map_err(|source| RunError::Io { context: format!("reading {}", config.display()), source })?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|source| RunError::Config { path: config.clone(), source })?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(trials) = trials {
        if trials == 0 || trials > u64::from(u32::MAX) {
            return Err(RunError::Runtime("--trials must lie in 1..=4294967295".into()));
        }
        cfg.trials = trials;
        if let Some(a) = cfg.adaptive.as_mut() {
            a.max_trials = a.max_trials.max(trials);
        }
    }
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    if workers == Some(0) {
        return Err(RunError::Runtime("--workers must be positive".into()));
    }
    cfg.workers = workers.or(cfg.workers);
    let output = run(&cfg)?;
    for path in &output.csv_paths {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", output.summary_path.display());
    print!("{}", output.summary);
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
