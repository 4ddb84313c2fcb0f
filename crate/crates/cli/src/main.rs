use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use betadqn_cli::config::ExperimentConfig;
use betadqn_cli::run::{run_sweep, SweepOutcome};
use betadqn_cli::theory_suite::{run_suite, write_csv, SuiteConfig};
use betadqn_cli::{report, toy};

#[derive(Parser)]
#[command(name = "betadqn", version, about = "Behavior-guided DQN experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (agent, seed) pair of a TOML experiment config.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long, env = "BETADQN_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
        /// Overrides `sweep.workers` from the config.
        #[arg(long, env = "BETADQN_WORKERS")]
        workers: Option<usize>,
    },
    /// Aggregate the per-run CSV files of a finished run directory.
    Report { dir: PathBuf },
    /// Operator contraction, fixed point and coverage visitation checks.
    Theory {
        /// Write the results CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// CliffWalk study: policy actions from one trajectory, then a
    /// β-DQN vs DQN sweep with heatmaps and selection traces.
    ToyCliffwalk {
        #[arg(long, env = "BETADQN_OUTPUT_DIR", default_value = "toy-cliffwalk")]
        output_dir: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, env = "BETADQN_WORKERS")]
        workers: Option<usize>,
    },
}

fn summarize(outcome: &SweepOutcome) -> ExitCode {
    for path in &outcome.written {
        println!("wrote {}", path.display());
    }
    if let Some(rep) = &outcome.report {
        for f in &rep.finals {
            println!(
                "{} (n={}) step {}: return {:.3} ± {:.3}, success {:.3} ± {:.3}",
                f.agent, f.seeds, f.step, f.return_mean, f.return_stderr, f.success_mean, f.success_stderr
            );
        }
    }
    for f in &outcome.failures {
        eprintln!("run {} seed {} failed: {}", f.agent.name(), f.seed, f.error);
    }
    if outcome.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, output_dir, workers } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if workers.is_some() {
                cfg.sweep.workers = workers;
            }
            Ok(summarize(&run_sweep(&cfg)?))
        }
        Command::Report { dir } => {
            let rep = report::report(&dir)?;
            for f in &rep.finals {
                println!(
                    "{} (n={}) final return {:.3}, success {:.3}",
                    f.agent, f.seeds, f.return_mean, f.success_mean
                );
            }
            println!("wrote {}", report::report_dir(&dir).display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Theory { out, seed } => {
            let results = run_suite(&SuiteConfig { seed, ..Default::default() });
            match out {
                Some(path) => write_csv(std::fs::File::create(path)?, &results)?,
                None => write_csv(std::io::stdout().lock(), &results)?,
            }
            Ok(if results.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::ToyCliffwalk { output_dir, steps, seeds, workers } => {
            Ok(summarize(&toy::run_toy(&output_dir, steps, seeds, workers)?))
        }
    }
}
