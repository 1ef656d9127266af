//! Neuroevolution of feed-forward policy networks.
//!
//! The weights of a small dense network are treated as one flat real vector
//! and optimized with the continuous univariate marginal distribution
//! algorithm (UMDA_c), or with a genetic-algorithm baseline, against the
//! total episode reward of built-in control tasks. A Bayesian signed-rank
//! test compares the two optimizers over repeated runs.
//!
//! Modules:
//!
//! * [`policy`]: network specs, flat parameter layout, forward pass, action selection.
//! * [`envs`]: cart-pole and point-mass lander environments.
//! * [`evolution`]: population operators and the generational loop.
//! * [`harness`]: rollouts, fitness, runs, repetitions and result files.
//! * [`bayes`]: posterior of (A worse, equivalent, A better) and simplex coordinates.
//! * [`config`]: experiment config files.

pub mod bayes;
pub mod config;
pub mod envs;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod policy;
pub mod seed;

pub use bayes::{bayesian_signed_rank, summarize, PairedDifferences, PosteriorTriple, RopeConfig};
pub use config::{ExperimentConfig, ExperimentPlan};
pub use envs::{Action, ActionSpec, EnvKind, EnvSeed, EnvState, Environment, StepResult};
pub use error::{Error, Result};
pub use evolution::{Algorithm, EvolutionConfig, GenerationStats, Population, UnivariateModel};
pub use harness::{EpisodeRecord, RunResult, SummaryRow};
pub use policy::{Activation, NetworkSpec, ParameterVector};
