//! Subcommand implementations behind the `umdac` binary.
//!
//! Each `cmd_*` function does the work and returns a report; printing is left
//! to the caller so the same code paths are usable from tests.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use umdac_core::bayes::{
    self, bayesian_signed_rank, simplex_coordinates, summarize, PairedDifferences, PosteriorTriple, RopeConfig,
};
use umdac_core::config::{ExperimentConfig, DEFAULT_OUTPUT_DIR};
use umdac_core::harness::{self, persist_experiment, read_result_json, read_summary_csv, run_experiment};
use umdac_core::seed::{derive_seed, Stream};
use umdac_core::{Algorithm, EnvKind, EpisodeRecord, SummaryRow};

/// Environment variable holding the default output root for `run`.
pub const OUTPUT_DIR_ENV: &str = "UMDAC_OUTPUT_DIR";

/// Output root used when a config leaves `output_dir` unset.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR), PathBuf::from)
}

#[derive(Debug, Clone)]
pub struct RepetitionLine {
    pub repetition: usize,
    pub seed: u64,
    /// Final average over the evaluation episodes, or the error text.
    pub outcome: std::result::Result<f64, String>,
}

#[derive(Debug, Clone)]
pub struct AlgorithmReport {
    pub algorithm: Algorithm,
    pub repetitions: Vec<RepetitionLine>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub environment: EnvKind,
    pub output_dir: PathBuf,
    pub summary_csv: PathBuf,
    pub algorithms: Vec<AlgorithmReport>,
}

impl RunReport {
    pub fn failed_repetitions(&self) -> usize {
        self.algorithms
            .iter()
            .flat_map(|a| &a.repetitions)
            .filter(|r| r.outcome.is_err())
            .count()
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.algorithms {
            writeln!(f, "{} / {}", self.environment, a.algorithm)?;
            for r in &a.repetitions {
                match &r.outcome {
                    Ok(avg) => writeln!(f, "  rep {:>2}  seed {:>20}  avg_reward_100 {avg:.3}", r.repetition, r.seed)?,
                    Err(e) => writeln!(f, "  rep {:>2}  seed {:>20}  FAILED: {e}", r.repetition, r.seed)?,
                }
            }
            let ok: Vec<f64> = a.repetitions.iter().filter_map(|r| r.outcome.as_ref().ok().copied()).collect();
            if !ok.is_empty() {
                writeln!(f, "  mean over reps {:.3}", ok.iter().sum::<f64>() / ok.len() as f64)?;
            }
        }
        write!(f, "summary: {}", self.summary_csv.display())
    }
}

/// `run <config>`: every configured algorithm, every repetition, persisted
/// under the output root.
///
/// Failed repetitions are reported but do not abort the others; callers
/// should treat [`RunReport::failed_repetitions`] > 0 as a failure.
pub fn cmd_run(config_path: &Path, workers: usize, output_override: Option<&Path>) -> Result<RunReport> {
    let config = ExperimentConfig::load(config_path)?;
    let mut plan = config.resolve(&default_output_dir())?;
    if let Some(dir) = output_override {
        plan.output_dir = dir.to_path_buf();
    }

    let mut algorithms = Vec::with_capacity(plan.algorithms.len());
    for &algorithm in &plan.algorithms {
        let outcomes = run_experiment(
            &plan.evolution,
            &plan.network,
            plan.environment,
            algorithm,
            plan.repetitions,
            workers,
        )?;
        persist_experiment(&plan.output_dir, plan.environment, algorithm, &outcomes)
            .with_context(|| format!("writing results under {}", plan.output_dir.display()))?;
        algorithms.push(AlgorithmReport {
            algorithm,
            repetitions: outcomes
                .iter()
                .map(|o| RepetitionLine {
                    repetition: o.repetition,
                    seed: o.seed,
                    outcome: o.result.as_ref().map(|r| r.final_mean).map_err(|e| e.to_string()),
                })
                .collect(),
        });
    }

    Ok(RunReport {
        environment: plan.environment,
        summary_csv: harness::summary_path(&plan.output_dir, plan.environment),
        output_dir: plan.output_dir,
        algorithms,
    })
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub environment: EnvKind,
    pub episodes: Vec<EpisodeRecord>,
    pub mean: f64,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} episodes", self.environment, self.episodes.len())?;
        for (i, e) in self.episodes.iter().enumerate() {
            writeln!(f, "  episode {i:>3}  reward {:.3}  steps {}", e.total_reward, e.steps)?;
        }
        write!(f, "mean reward {:.3}", self.mean)
    }
}

/// `eval <result.json>`: replays the saved best individual on fresh episodes.
///
/// Episode seeds come from `seed` through the final-evaluation stream, so
/// the same `(seed, episodes)` always replays the same episodes.
pub fn cmd_eval(result_json: &Path, episodes: usize, seed: u64) -> Result<EvalReport> {
    if episodes == 0 {
        bail!("--episodes must be at least 1");
    }
    let result = read_result_json(result_json).with_context(|| format!("reading {}", result_json.display()))?;
    let snapshot = &result.config_snapshot;
    let eval_seed = derive_seed(seed, Stream::Rescore, &[]);
    let seeds = harness::final_eval_seeds(eval_seed, episodes);
    let mut env = snapshot.environment.make();
    let episodes = seeds
        .iter()
        .map(|&s| harness::rollout(env.as_mut(), &snapshot.network, &result.best_params, s))
        .collect::<umdac_core::Result<Vec<_>>>()?;
    let mean = episodes.iter().map(|e| e.total_reward).sum::<f64>() / episodes.len() as f64;
    Ok(EvalReport {
        environment: snapshot.environment,
        episodes,
        mean,
    })
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub rope: RopeConfig,
    pub seed: u64,
    /// Keep only rows of this algorithm from the first file.
    pub algorithm_a: Option<Algorithm>,
    /// Keep only rows of this algorithm from the second file.
    pub algorithm_b: Option<Algorithm>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub label_a: String,
    pub label_b: String,
    pub differences: Vec<f64>,
    pub expected: PosteriorTriple,
    pub out_dir: PathBuf,
}

impl fmt::Display for AnalyzeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "paired differences ({} - {}), m = {}", self.label_a, self.label_b, self.differences.len())?;
        writeln!(f, "  P({} better) = {:.4}", self.label_b, self.expected.p_left)?;
        writeln!(f, "  P(rope)         = {:.4}", self.expected.p_rope)?;
        writeln!(f, "  P({} better) = {:.4}", self.label_a, self.expected.p_right)?;
        write!(f, "written to {}", self.out_dir.display())
    }
}

fn load_side(path: &Path, filter: Option<Algorithm>) -> Result<(Vec<SummaryRow>, String)> {
    let rows = read_summary_csv(path).with_context(|| format!("reading {}", path.display()))?;
    let rows: Vec<SummaryRow> = match filter {
        Some(a) => rows.into_iter().filter(|r| r.algorithm == a).collect(),
        None => rows,
    };
    let first = rows.first().map(|r| r.algorithm);
    let Some(first) = first else {
        bail!("{}: no summary rows{}", path.display(), filter.map_or(String::new(), |a| format!(" for `{a}`")));
    };
    if rows.iter().any(|r| r.algorithm != first) {
        bail!(
            "{} holds rows of several algorithms; pick one with --algo-a / --algo-b",
            path.display()
        );
    }
    Ok((rows, first.to_string()))
}

/// `analyze <a.csv> <b.csv>`: Bayesian signed-rank test of A minus B.
///
/// Writes `posterior_samples.csv`, `simplex_points.csv` and
/// `simplex_boundaries.csv` into `out_dir`.
pub fn cmd_analyze(a: &Path, b: &Path, out_dir: &Path, opts: &AnalyzeOptions) -> Result<AnalyzeReport> {
    let (rows_a, label_a) = load_side(a, opts.algorithm_a)?;
    let (rows_b, label_b) = load_side(b, opts.algorithm_b)?;
    let diffs = PairedDifferences::from_summaries(&rows_a, &rows_b)?;
    let posterior = bayesian_signed_rank(&diffs, &opts.rope, opts.seed)?;
    let expected = summarize(&posterior)?;

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    bayes::write_posterior_csv(&out_dir.join("posterior_samples.csv"), &posterior)?;
    bayes::write_simplex_points_csv(&out_dir.join("simplex_points.csv"), &simplex_coordinates(&posterior))?;
    bayes::write_boundaries_csv(&out_dir.join("simplex_boundaries.csv"))?;

    Ok(AnalyzeReport {
        label_a,
        label_b,
        differences: diffs.values().to_vec(),
        expected,
        out_dir: out_dir.to_path_buf(),
    })
}
