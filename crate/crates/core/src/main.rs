use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use confrac::config::{self, ExperimentKind};
use confrac::runner;

/// Reproducible experiment runner for the fractional-operator check suites.
#[derive(Parser, Debug)]
#[command(name = "confrac", version, about)]
struct Args {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for CSV tables and the summary.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Override the seed of every configured experiment.
    #[arg(long)]
    seed: Option<u64>,

    /// List the available experiment names and exit.
    #[arg(long)]
    list_experiments: bool,

    /// Verbose logging.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new()
        .filter_level(if args.verbose {
            log::LevelFilter::Debug
        } else {
            log::LevelFilter::Info
        })
        .init();

    if args.list_experiments {
        for kind in ExperimentKind::all() {
            println!("{}", kind.name());
        }
        return ExitCode::SUCCESS;
    }

    let Some(config_path) = args.config else {
        eprintln!("error: --config is required (or use --list-experiments)");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let mut plan = match config::parse_config(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        for exp in &mut plan.experiments {
            exp.seed = seed;
        }
    }

    match runner::run(&plan, &args.out) {
        Ok(summary) => {
            println!(
                "{} rows, {} failures",
                summary.rows.len(),
                summary.failures
            );
            if summary.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
