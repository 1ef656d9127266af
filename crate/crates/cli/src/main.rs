use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use umdac_cli::{cmd_analyze, cmd_eval, cmd_run, AnalyzeOptions};
use umdac_core::harness::FINAL_EVAL_EPISODES;
use umdac_core::{Algorithm, RopeConfig};

/// Neuroevolution of policy networks with UMDA_c and a GA baseline.
#[derive(Parser)]
#[command(name = "umdac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm and repetition of an experiment config (TOML).
    Run {
        config: PathBuf,
        /// Parallel fitness evaluations; results do not depend on it.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output root. Overrides the config's output_dir, which in turn
        /// overrides $UMDAC_OUTPUT_DIR (default "runs").
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Re-evaluate the best individual stored in a result.json.
    Eval {
        result: PathBuf,
        #[arg(long, default_value_t = FINAL_EVAL_EPISODES)]
        episodes: usize,
        /// Seed for the fresh episode starts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bayesian signed-rank comparison of two summary.csv files (A minus B).
    Analyze {
        a: PathBuf,
        b: PathBuf,
        /// Half-width of the region of practical equivalence.
        #[arg(long, default_value_t = 0.1)]
        rope: f64,
        #[arg(long)]
        out: PathBuf,
        /// Use only rows of this algorithm from A.
        #[arg(long)]
        algo_a: Option<Algorithm>,
        /// Use only rows of this algorithm from B.
        #[arg(long)]
        algo_b: Option<Algorithm>,
        /// Monte Carlo draws from the posterior.
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        /// Dirichlet weight of the prior pseudo-observation.
        #[arg(long, default_value_t = 0.5)]
        prior_strength: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            config,
            workers,
            output_dir,
        } => {
            let report = cmd_run(&config, workers, output_dir.as_deref())?;
            println!("{report}");
            let failed = report.failed_repetitions();
            if failed > 0 {
                eprintln!("error: {failed} repetition(s) failed");
            }
            Ok(failed == 0)
        }
        Command::Eval { result, episodes, seed } => {
            println!("{}", cmd_eval(&result, episodes, seed)?);
            Ok(true)
        }
        Command::Analyze {
            a,
            b,
            rope,
            out,
            algo_a,
            algo_b,
            samples,
            prior_strength,
            seed,
        } => {
            let opts = AnalyzeOptions {
                rope: RopeConfig {
                    rope_radius: rope,
                    prior_strength,
                    mc_samples: samples,
                    ..RopeConfig::default()
                },
                seed,
                algorithm_a: algo_a,
                algorithm_b: algo_b,
            };
            println!("{}", cmd_analyze(&a, &b, &out, &opts)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
