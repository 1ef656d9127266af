//! Episode rollouts, noisy fitness, full runs and the repetition protocol.
//!
//! Every episode seed is derived from `(master_seed, generation, individual,
//! episode)`, so fitness values do not depend on how evaluations are scheduled
//! across worker threads.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envs::{Action, ActionSpec, EnvKind, EnvSeed, Environment};
use crate::error::{Error, Result};
use crate::evolution::{evolve, Algorithm, EvolutionConfig, GenerationStats};
use crate::policy::{select_continuous_action, select_discrete_action, Network, NetworkSpec, ParameterVector};
use crate::seed::{derive_seed, Stream};

/// Episodes used to score the best individual at the end of a run.
pub const FINAL_EVAL_EPISODES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub total_reward: f64,
    pub steps: usize,
    pub seed: EnvSeed,
}

fn check_compatible(env: &dyn Environment, spec: &NetworkSpec) -> Result<()> {
    if spec.input_dim() != env.state_dim() {
        return Err(Error::Structural(format!(
            "network input is {} wide, environment state is {}",
            spec.input_dim(),
            env.state_dim()
        )));
    }
    let out = env.action_spec().output_dim();
    if spec.output_dim() != out {
        return Err(Error::Structural(format!(
            "network output is {} wide, environment needs {out}",
            spec.output_dim()
        )));
    }
    Ok(())
}

fn play(env: &mut dyn Environment, net: &mut Network, seed: EnvSeed) -> Result<EpisodeRecord> {
    let action_spec = env.action_spec();
    let mut obs = env.reset(seed).observation;
    let mut total_reward = 0.0;
    let mut steps = 0;
    loop {
        let out = net.forward(&obs)?;
        let action = match action_spec {
            ActionSpec::Discrete(_) => Action::Discrete(select_discrete_action(out)?),
            ActionSpec::Continuous(_) => Action::Continuous(select_continuous_action(out)?),
        };
        let r = env.step(&action)?;
        total_reward += r.reward;
        steps += 1;
        obs = r.observation;
        if r.done {
            return Ok(EpisodeRecord {
                total_reward,
                steps,
                seed,
            });
        }
    }
}

/// Plays one episode: `reset(seed)`, then forward, select, step until done.
pub fn rollout(
    env: &mut dyn Environment,
    spec: &NetworkSpec,
    params: &ParameterVector,
    seed: EnvSeed,
) -> Result<EpisodeRecord> {
    check_compatible(env, spec)?;
    let mut net = Network::new(spec, params)?;
    play(env, &mut net, seed)
}

/// Mean total reward over one episode per seed.
pub fn mean_reward(
    env: &mut dyn Environment,
    spec: &NetworkSpec,
    params: &ParameterVector,
    seeds: &[EnvSeed],
) -> Result<f64> {
    if seeds.is_empty() {
        return Err(Error::Input("fitness needs at least one evaluation".into()));
    }
    check_compatible(env, spec)?;
    let mut net = Network::new(spec, params)?;
    let mut sum = 0.0;
    for &s in seeds {
        sum += play(env, &mut net, s)?.total_reward;
    }
    Ok(sum / seeds.len() as f64)
}

/// Fitness as the mean of `individual_evals` episodes with distinct seeds drawn from `rng`.
pub fn evaluate_individual<R: Rng + ?Sized>(
    env: &mut dyn Environment,
    spec: &NetworkSpec,
    params: &ParameterVector,
    individual_evals: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut seeds: Vec<EnvSeed> = Vec::with_capacity(individual_evals);
    while seeds.len() < individual_evals {
        let s = EnvSeed(rng.random());
        if !seeds.contains(&s) {
            seeds.push(s);
        }
    }
    mean_reward(env, spec, params, &seeds)
}

/// Episode seeds of one individual within a generation.
pub fn individual_seeds(master_seed: u64, generation: usize, index: usize, evals: usize) -> Vec<EnvSeed> {
    (0..evals)
        .map(|e| EnvSeed(derive_seed(master_seed, Stream::Episode, &[generation as u64, index as u64, e as u64])))
        .collect()
}

pub fn final_eval_seeds(master_seed: u64, episodes: usize) -> Vec<EnvSeed> {
    (0..episodes)
        .map(|e| EnvSeed(derive_seed(master_seed, Stream::FinalEval, &[e as u64])))
        .collect()
}

/// What produced a [`RunResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub environment: EnvKind,
    pub algorithm: Algorithm,
    pub network: NetworkSpec,
    pub evolution: EvolutionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_params: ParameterVector,
    pub best_fitness: f64,
    pub best_generation: usize,
    pub history: Vec<GenerationStats>,
    pub final_eval: Vec<EpisodeRecord>,
    /// Mean of `final_eval` totals; the value reported to the comparison.
    pub final_mean: f64,
    pub config_snapshot: ConfigSnapshot,
}

/// Scores episodes in parallel on the current rayon pool; output order follows `seeds`.
fn episodes_parallel(
    kind: EnvKind,
    spec: &NetworkSpec,
    params: &ParameterVector,
    seeds: &[EnvSeed],
) -> Result<Vec<EpisodeRecord>> {
    seeds
        .par_iter()
        .map_init(|| kind.make(), |env, &s| rollout(env.as_mut(), spec, params, s))
        .collect()
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Input(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// One full run: evolve, then score the best-ever individual on
/// [`FINAL_EVAL_EPISODES`] fresh episodes.
///
/// `workers` sets the evaluation parallelism; it never changes the result.
pub fn run_evolution(
    cfg: &EvolutionConfig,
    spec: &NetworkSpec,
    env: EnvKind,
    algorithm: Algorithm,
    workers: usize,
) -> Result<RunResult> {
    check_compatible(env.make().as_ref(), spec)?;
    with_workers(workers, || run_on_current_pool(cfg, spec, env, algorithm))?
}

fn run_on_current_pool(
    cfg: &EvolutionConfig,
    spec: &NetworkSpec,
    env: EnvKind,
    algorithm: Algorithm,
) -> Result<RunResult> {
    let n = spec.param_count();
    let outcome = evolve(cfg, n, algorithm, |generation, pop, indices| {
        indices
            .par_iter()
            .map_init(
                || env.make(),
                |e, &i| {
                    let seeds = individual_seeds(cfg.master_seed, generation, i, cfg.individual_evals);
                    mean_reward(e.as_mut(), spec, pop.individual(i), &seeds)
                },
            )
            .collect()
    })?;

    let final_eval = episodes_parallel(
        env,
        spec,
        &outcome.best_params,
        &final_eval_seeds(cfg.master_seed, FINAL_EVAL_EPISODES),
    )?;
    let final_mean = final_eval.iter().map(|r| r.total_reward).sum::<f64>() / final_eval.len() as f64;
    Ok(RunResult {
        best_params: outcome.best_params,
        best_fitness: outcome.best_fitness,
        best_generation: outcome.best_generation,
        history: outcome.history,
        final_eval,
        final_mean,
        config_snapshot: ConfigSnapshot {
            environment: env,
            algorithm,
            network: spec.clone(),
            evolution: cfg.clone(),
        },
    })
}

/// Master seed of repetition `rep`; shared by both algorithms so their
/// repetitions start from the same population.
pub fn repetition_seed(master_seed: u64, rep: usize) -> u64 {
    derive_seed(master_seed, Stream::Repetition, &[rep as u64])
}

#[derive(Debug)]
pub struct RepetitionOutcome {
    pub repetition: usize,
    pub seed: u64,
    pub result: Result<RunResult>,
}

/// Runs `repetitions` independent runs with repetition-derived seeds.
///
/// A failing repetition is kept as an `Err` entry; the others still run.
pub fn run_experiment(
    cfg: &EvolutionConfig,
    spec: &NetworkSpec,
    env: EnvKind,
    algorithm: Algorithm,
    repetitions: usize,
    workers: usize,
) -> Result<Vec<RepetitionOutcome>> {
    if repetitions == 0 {
        return Err(Error::Input("at least one repetition is required".into()));
    }
    check_compatible(env.make().as_ref(), spec)?;
    with_workers(workers, || {
        (0..repetitions)
            .map(|rep| {
                let seed = repetition_seed(cfg.master_seed, rep);
                let rep_cfg = EvolutionConfig {
                    master_seed: seed,
                    ..cfg.clone()
                };
                RepetitionOutcome {
                    repetition: rep,
                    seed,
                    result: run_on_current_pool(&rep_cfg, spec, env, algorithm),
                }
            })
            .collect()
    })
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub repetition: usize,
    pub avg_reward_100: f64,
}

pub fn write_history_csv(path: &Path, history: &[GenerationStats]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for h in history {
        w.serialize(h)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_history_csv(path: &Path) -> Result<Vec<GenerationStats>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_result_json(path: &Path, result: &RunResult) -> Result<()> {
    let text = serde_json::to_string_pretty(result)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_result_json(path: &Path) -> Result<RunResult> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let result: RunResult = serde_json::from_str(&text)?;
    if result.best_params.len() != result.config_snapshot.network.param_count() {
        return Err(Error::Structural(format!(
            "{}: best_params has {} values, network needs {}",
            path.display(),
            result.best_params.len(),
            result.config_snapshot.network.param_count()
        )));
    }
    Ok(result)
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// `<root>/<env>/<algorithm>/rep<k>/`
pub fn repetition_dir(root: &Path, env: EnvKind, algorithm: Algorithm, rep: usize) -> PathBuf {
    root.join(env.name()).join(algorithm.name()).join(format!("rep{rep}"))
}

pub fn summary_path(root: &Path, env: EnvKind) -> PathBuf {
    root.join(env.name()).join("summary.csv")
}

/// Writes per-repetition `history.csv` / `result.json` and merges this
/// algorithm's rows into `<root>/<env>/summary.csv` (rows of other algorithms
/// already there are kept). Also writes `<root>/<env>/<algorithm>/summary.csv`.
///
/// Returns the summary rows of this algorithm; failed repetitions have none.
pub fn persist_experiment(
    root: &Path,
    env: EnvKind,
    algorithm: Algorithm,
    outcomes: &[RepetitionOutcome],
) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for o in outcomes {
        let Ok(result) = &o.result else { continue };
        let dir = repetition_dir(root, env, algorithm, o.repetition);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_history_csv(&dir.join("history.csv"), &result.history)?;
        write_result_json(&dir.join("result.json"), result)?;
        rows.push(SummaryRow {
            algorithm,
            repetition: o.repetition,
            avg_reward_100: result.final_mean,
        });
    }
    let alg_dir = root.join(env.name()).join(algorithm.name());
    fs::create_dir_all(&alg_dir).map_err(|e| Error::io(&alg_dir, e))?;
    write_summary_csv(&alg_dir.join("summary.csv"), &rows)?;

    let path = summary_path(root, env);
    let mut merged: BTreeMap<(Algorithm, usize), SummaryRow> = BTreeMap::new();
    if path.exists() {
        for r in read_summary_csv(&path)? {
            if r.algorithm != algorithm {
                merged.insert((r.algorithm, r.repetition), r);
            }
        }
    }
    for r in &rows {
        merged.insert((r.algorithm, r.repetition), r.clone());
    }
    write_summary_csv(&path, &merged.into_values().collect::<Vec<_>>())?;
    Ok(rows)
}
