//! Experiment configuration files.
//!
//! A config is a TOML document with three flat sections. Only
//! `experiment.environment` is required; everything else has a default, and
//! the evolution defaults scale with the parameter count `n` of the network:
//!
//! ```toml
//! [experiment]
//! environment = "cartpole"        # cartpole | lander-discrete | lander-continuous
//! algorithm = ["umda_c", "ga"]    # a single name or a list
//! repetitions = 10
//! master_seed = 42
//! output_dir = "runs"
//!
//! [network]
//! hidden_dims = []
//! hidden_activation = "tanh"      # tanh | sigmoid | linear
//! output_activation = "linear"    # linear for discrete tasks, tanh for continuous
//!
//! [evolution]
//! pop_size = 60                   # 6n
//! generations = 30                # 3n
//! individual_evals = 3
//! survivor_rate = 0.5
//! mutation_rate = 0.1
//! reevaluate_survivors = false
//! ```
//!
//! Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::{ActionSpec, EnvKind};
use crate::error::{Error, Result};
use crate::evolution::{Algorithm, EvolutionConfig};
use crate::policy::{Activation, NetworkSpec};

pub const DEFAULT_REPETITIONS: usize = 10;
pub const DEFAULT_MASTER_SEED: u64 = 42;
pub const DEFAULT_OUTPUT_DIR: &str = "runs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgorithmChoice {
    One(Algorithm),
    Many(Vec<Algorithm>),
}

impl AlgorithmChoice {
    pub fn to_vec(&self) -> Vec<Algorithm> {
        match self {
            AlgorithmChoice::One(a) => vec![*a],
            AlgorithmChoice::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub environment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_activation: Option<Activation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_activation: Option<Activation>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pop_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub individual_evals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survivor_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reevaluate_survivors: Option<bool>,
}

/// A config file as written, before defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub environment: EnvKind,
    pub algorithms: Vec<Algorithm>,
    pub network: NetworkSpec,
    pub evolution: EvolutionConfig,
    pub repetitions: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn for_environment(env: EnvKind) -> Self {
        Self {
            experiment: ExperimentSection {
                environment: env.name().to_string(),
                algorithm: None,
                repetitions: None,
                master_seed: None,
                output_dir: None,
            },
            network: NetworkSection::default(),
            evolution: EvolutionSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigSyntax(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::ConfigSyntax(m) => Error::ConfigSyntax(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigSyntax(e.to_string()))
    }

    /// Applies defaults and validates every field.
    ///
    /// `default_output_dir` is used when the file leaves `output_dir` unset.
    pub fn resolve(&self, default_output_dir: &Path) -> Result<ExperimentPlan> {
        let e = &self.experiment;
        let environment: EnvKind = e.environment.parse().map_err(|_| {
            Error::config(
                "experiment.environment",
                format!(
                    "unknown environment `{}`; registered environments: {}",
                    e.environment,
                    EnvKind::registered_names().join(", ")
                ),
            )
        })?;

        let algorithms = e.algorithm.as_ref().map_or_else(|| vec![Algorithm::UmdaC], AlgorithmChoice::to_vec);
        if algorithms.is_empty() {
            return Err(Error::config("experiment.algorithm", "lists no algorithms"));
        }
        for (i, a) in algorithms.iter().enumerate() {
            if algorithms[..i].contains(a) {
                return Err(Error::config("experiment.algorithm", format!("`{a}` listed twice")));
            }
        }

        let repetitions = e.repetitions.unwrap_or(DEFAULT_REPETITIONS);
        if repetitions == 0 {
            return Err(Error::config("experiment.repetitions", "must be positive"));
        }

        let action = environment.action_spec();
        let net = &self.network;
        let output_activation = net.output_activation.unwrap_or(action.default_output_activation());
        if matches!(action, ActionSpec::Continuous(_)) && output_activation == Activation::Linear {
            return Err(Error::config(
                "network.output_activation",
                format!("`linear` cannot drive the bounded actions of {environment}; use tanh"),
            ));
        }
        let network = NetworkSpec::new(
            environment.state_dim(),
            net.hidden_dims.clone().unwrap_or_default(),
            action.output_dim(),
            net.hidden_activation.unwrap_or(Activation::Tanh),
            output_activation,
        )
        .map_err(|err| Error::config("network.hidden_dims", err.to_string()))?;

        let n = network.param_count();
        let defaults = EvolutionConfig::for_param_count(n, e.master_seed.unwrap_or(DEFAULT_MASTER_SEED));
        let ev = &self.evolution;
        let evolution = EvolutionConfig {
            pop_size: ev.pop_size.unwrap_or(defaults.pop_size),
            generations: ev.generations.unwrap_or(defaults.generations),
            survivor_rate: ev.survivor_rate.unwrap_or(defaults.survivor_rate),
            individual_evals: ev.individual_evals.unwrap_or(defaults.individual_evals),
            mutation_rate: ev.mutation_rate.unwrap_or(defaults.mutation_rate),
            reevaluate_survivors: ev.reevaluate_survivors.unwrap_or(defaults.reevaluate_survivors),
            master_seed: defaults.master_seed,
        };
        evolution.validate()?;

        Ok(ExperimentPlan {
            environment,
            algorithms,
            network,
            evolution,
            repetitions,
            output_dir: e.output_dir.clone().unwrap_or_else(|| default_output_dir.to_path_buf()),
        })
    }
}
