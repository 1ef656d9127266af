//! Episodic environments with a seeded `reset`/`step` contract.

mod cartpole;
mod lander;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{Activation, NetworkSpec};

pub use cartpole::{CartPole, CartPoleState};
pub use lander::{Lander, LanderMode, LanderState};

/// Seed for one episode. Same seed, same initial state and stochastic stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnvSeed(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub observation: Vec<f64>,
    pub step_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionSpec {
    /// `n` mutually exclusive actions, chosen by argmax.
    Discrete(usize),
    /// `dim` real components, each in `[-1, 1]`.
    Continuous(usize),
}

impl ActionSpec {
    /// Width of the network output layer driving this action space.
    pub fn output_dim(self) -> usize {
        match self {
            ActionSpec::Discrete(n) | ActionSpec::Continuous(n) => n,
        }
    }

    /// Output activation: linear for argmax tasks, tanh to honor `[-1, 1]`.
    pub fn default_output_activation(self) -> Activation {
        match self {
            ActionSpec::Discrete(_) => Activation::Linear,
            ActionSpec::Continuous(_) => Activation::Tanh,
        }
    }
}

pub trait Environment: Send {
    fn state_dim(&self) -> usize;
    fn action_spec(&self) -> ActionSpec;
    fn reset(&mut self, seed: EnvSeed) -> EnvState;
    fn step(&mut self, action: &Action) -> Result<StepResult>;
}

/// Registered environments, addressed by name in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvKind {
    #[serde(rename = "cartpole")]
    CartPole,
    #[serde(rename = "lander-discrete")]
    LanderDiscrete,
    #[serde(rename = "lander-continuous")]
    LanderContinuous,
}

impl EnvKind {
    pub const ALL: [EnvKind; 3] = [EnvKind::CartPole, EnvKind::LanderDiscrete, EnvKind::LanderContinuous];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::CartPole => "cartpole",
            EnvKind::LanderDiscrete => "lander-discrete",
            EnvKind::LanderContinuous => "lander-continuous",
        }
    }

    pub fn registered_names() -> Vec<&'static str> {
        Self::ALL.iter().map(|k| k.name()).collect()
    }

    pub fn make(self) -> Box<dyn Environment> {
        match self {
            EnvKind::CartPole => Box::new(CartPole::new()),
            EnvKind::LanderDiscrete => Box::new(Lander::new(LanderMode::Discrete)),
            EnvKind::LanderContinuous => Box::new(Lander::new(LanderMode::Continuous)),
        }
    }

    pub fn state_dim(self) -> usize {
        match self {
            EnvKind::CartPole => cartpole::STATE_DIM,
            EnvKind::LanderDiscrete | EnvKind::LanderContinuous => lander::STATE_DIM,
        }
    }

    pub fn action_spec(self) -> ActionSpec {
        match self {
            EnvKind::CartPole => ActionSpec::Discrete(2),
            EnvKind::LanderDiscrete => ActionSpec::Discrete(4),
            EnvKind::LanderContinuous => ActionSpec::Continuous(2),
        }
    }

    /// The architecture used for this task when nothing is overridden: no hidden layers.
    pub fn default_network(self) -> NetworkSpec {
        let a = self.action_spec();
        NetworkSpec::direct(self.state_dim(), a.output_dim(), a.default_output_activation())
            .expect("registered environments have positive dimensions")
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Input(format!(
                "unknown environment `{s}`; registered environments: {}",
                Self::registered_names().join(", ")
            ))
        })
    }
}
