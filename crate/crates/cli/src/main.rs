use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opo_cmdp::harness::ExperimentConfig;
use opo_cmdp_cli::{cmd_bound, cmd_run, cmd_sweep, cmd_verify, parse_config, parse_seeds, CliError};

#[derive(Parser)]
#[command(name = "opo-cmdp", version, about = "Run and verify OPO-CMDP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write metrics.csv and summary.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write regret.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Run one experiment per seed in parallel, into <out>/seed-<n>/.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated list, e.g. 1,2,3.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: bool,
    },
    /// Rerun a finished run directory and recheck every inequality.
    Verify {
        dir: PathBuf,
        /// Use this config instead of <dir>/config.json.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the evaluated regret bound for a config.
    Bound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &std::path::Path, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let mut config = parse_config(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, seed, out, plot } => {
            let config = load(&config, seed)?;
            let outcome = cmd_run(&config, &out, plot);
            if let Ok(outcome) = &outcome {
                print!("{}", opo_cmdp_cli::summary_text(outcome));
            }
            outcome.map(|_| ())
        }
        Command::Sweep { config, seeds, out, plot } => {
            let config = load(&config, None)?;
            let seeds = parse_seeds(&seeds)?;
            let mut worst: Option<CliError> = None;
            for (seed, result) in cmd_sweep(&config, &seeds, &out, plot) {
                match result {
                    Ok(outcome) => println!(
                        "seed {seed}: regret {:.6}, suites pass",
                        outcome.run.records.last().map_or(0.0, |r| r.cum_regret)
                    ),
                    Err(e) => {
                        println!("seed {seed}: {e}");
                        if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                            worst = Some(e);
                        }
                    }
                }
            }
            worst.map_or(Ok(()), Err)
        }
        Command::Verify { dir, config, seed } => {
            let path = config.unwrap_or_else(|| dir.join("config.json"));
            let outcome = cmd_verify(&dir, Some(load(&path, seed)?))?;
            println!("metrics.csv reproduced");
            for report in outcome.suite.reports() {
                println!("{}: {} checks, 0 violations", report.name, report.checks);
            }
            println!("oracle concentration: pass");
            Ok(())
        }
        Command::Bound { config, seed } => {
            let config = load(&config, seed)?;
            println!("{}", cmd_bound(&config)?);
            Ok(())
        }
    }
}
