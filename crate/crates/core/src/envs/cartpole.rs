//! Cart-pole balancing with the classic-control dynamics.

use rand::Rng as _;

use super::{Action, ActionSpec, EnvSeed, EnvState, Environment, StepResult};
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};

pub(crate) const STATE_DIM: usize = 4;

pub const GRAVITY: f64 = 9.8;
pub const CART_MASS: f64 = 1.0;
pub const POLE_MASS: f64 = 0.1;
pub const TOTAL_MASS: f64 = CART_MASS + POLE_MASS;
/// Half the pole's length.
pub const POLE_HALF_LENGTH: f64 = 0.5;
pub const POLE_MASS_LENGTH: f64 = POLE_MASS * POLE_HALF_LENGTH;
pub const FORCE_MAG: f64 = 10.0;
pub const TAU: f64 = 0.02;
pub const X_THRESHOLD: f64 = 2.4;
pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
pub const MAX_STEPS: usize = 200;
pub const INIT_BOUND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.x, self.x_dot, self.theta, self.theta_dot]
    }

    /// One explicit Euler step under horizontal `force`.
    pub fn integrate(self, force: f64) -> Self {
        let (sin_t, cos_t) = self.theta.sin_cos();
        let temp = (force + POLE_MASS_LENGTH * self.theta_dot * self.theta_dot * sin_t) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin_t - cos_t * temp)
            / (POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_t * cos_t / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS;
        Self {
            x: self.x + TAU * self.x_dot,
            x_dot: self.x_dot + TAU * x_acc,
            theta: self.theta + TAU * self.theta_dot,
            theta_dot: self.theta_dot + TAU * theta_acc,
        }
    }

    pub fn out_of_bounds(&self) -> bool {
        self.x.abs() > X_THRESHOLD || self.theta.abs() > THETA_THRESHOLD
    }
}

#[derive(Debug, Clone)]
pub struct CartPole {
    state: CartPoleState,
    steps: usize,
    done: bool,
    rng: Rng,
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl CartPole {
    pub fn new() -> Self {
        Self {
            state: CartPoleState {
                x: 0.0,
                x_dot: 0.0,
                theta: 0.0,
                theta_dot: 0.0,
            },
            steps: 0,
            done: true,
            rng: rng_from_seed(0),
        }
    }

    pub fn state(&self) -> CartPoleState {
        self.state
    }

    /// Places the system in an explicit state, e.g. for single-step checks.
    pub fn set_state(&mut self, state: CartPoleState, step_index: usize) {
        self.state = state;
        self.steps = step_index;
        self.done = false;
    }
}

impl Environment for CartPole {
    fn state_dim(&self) -> usize {
        STATE_DIM
    }

    fn action_spec(&self) -> ActionSpec {
        ActionSpec::Discrete(2)
    }

    fn reset(&mut self, seed: EnvSeed) -> EnvState {
        self.rng = rng_from_seed(seed.0);
        let mut draw = || self.rng.random_range(-INIT_BOUND..=INIT_BOUND);
        self.state = CartPoleState {
            x: draw(),
            x_dot: draw(),
            theta: draw(),
            theta_dot: draw(),
        };
        self.steps = 0;
        self.done = false;
        EnvState {
            observation: self.state.to_vec(),
            step_index: 0,
        }
    }

    fn step(&mut self, action: &Action) -> Result<StepResult> {
        if self.done {
            return Err(Error::Contract("cart-pole stepped after episode end; call reset".into()));
        }
        let force = match action {
            Action::Discrete(1) => FORCE_MAG,
            Action::Discrete(0) => -FORCE_MAG,
            other => {
                return Err(Error::Input(format!("cart-pole accepts discrete actions 0 or 1, got {other:?}")))
            }
        };
        self.state = self.state.integrate(force);
        self.steps += 1;
        self.done = self.state.out_of_bounds() || self.steps >= MAX_STEPS;
        Ok(StepResult {
            observation: self.state.to_vec(),
            reward: 1.0,
            done: self.done,
        })
    }
}
