//! Point-mass lunar lander with discrete and continuous engine controls.
//!
//! The craft is a point mass in the plane under constant gravity. It starts
//! above the landing pad (centered on `x = 0`) with a random horizontal offset
//! and random velocity, and must touch down on the pad slowly.
//!
//! Observation: `(x, y, x_dot, y_dot, left_contact, right_contact)`. The two
//! contact flags are 1.0 once the craft touches the ground, else 0.0.
//!
//! Per-step reward is the change of the potential
//! `-100 * |(x, y)| - 100 * |(x_dot, y_dot)|`, minus 0.3 times the main
//! throttle. Touching down on the pad below the safe vertical speed adds
//! +100; touching down faster, or leaving the arena, adds -100.

use rand::Rng as _;

use super::{Action, ActionSpec, EnvSeed, EnvState, Environment, StepResult};
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, Rng};

pub(crate) const STATE_DIM: usize = 6;

pub const GRAVITY: f64 = 1.0;
pub const TAU: f64 = 0.05;
pub const MAIN_ACCEL: f64 = 3.0 * GRAVITY;
pub const LATERAL_ACCEL: f64 = 0.6 * GRAVITY;
pub const PAD_HALF_WIDTH: f64 = 0.25;
pub const SAFE_SPEED: f64 = 0.5;
pub const X_BOUND: f64 = 2.0;
pub const Y_MAX: f64 = 2.0;
pub const MAX_STEPS: usize = 500;
pub const MAIN_ENGINE_COST: f64 = 0.3;
pub const LANDING_BONUS: f64 = 100.0;
pub const CRASH_PENALTY: f64 = -100.0;
pub const SHAPING_SCALE: f64 = 100.0;
/// Lateral throttle magnitudes at or below this do nothing.
pub const LATERAL_DEAD_ZONE: f64 = 0.5;

/// Initial altitude; every episode starts here.
pub const START_HEIGHT: f64 = 1.5;
/// `x` is drawn from `[-START_X_RANGE, START_X_RANGE]`.
pub const START_X_RANGE: f64 = 0.6;
/// `x_dot` is drawn from `[-START_VX_RANGE, START_VX_RANGE]`.
pub const START_VX_RANGE: f64 = 0.3;
/// `y_dot` is drawn from `[-START_VY_RANGE, 0]`.
pub const START_VY_RANGE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanderMode {
    /// 0 idle, 1 lateral +x, 2 main engine, 3 lateral -x.
    Discrete,
    /// `(main, lateral)` throttles in `[-1, 1]`.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanderState {
    pub x: f64,
    pub y: f64,
    pub x_dot: f64,
    pub y_dot: f64,
    pub touched_down: bool,
}

impl LanderState {
    pub fn to_vec(self) -> Vec<f64> {
        let contact = if self.touched_down { 1.0 } else { 0.0 };
        vec![self.x, self.y, self.x_dot, self.y_dot, contact, contact]
    }

    fn potential(&self) -> f64 {
        -SHAPING_SCALE * self.x.hypot(self.y) - SHAPING_SCALE * self.x_dot.hypot(self.y_dot)
    }
}

/// Engine command after decoding either action form.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Thrust {
    /// Main throttle in `[0, 1]`.
    main: f64,
    /// Signed lateral acceleration.
    lateral: f64,
}

impl Thrust {
    const IDLE: Thrust = Thrust {
        main: 0.0,
        lateral: 0.0,
    };
}

#[derive(Debug, Clone)]
pub struct Lander {
    mode: LanderMode,
    state: LanderState,
    steps: usize,
    done: bool,
    rng: Rng,
}

impl Lander {
    pub fn new(mode: LanderMode) -> Self {
        Self {
            mode,
            state: LanderState {
                x: 0.0,
                y: START_HEIGHT,
                x_dot: 0.0,
                y_dot: 0.0,
                touched_down: false,
            },
            steps: 0,
            done: true,
            rng: rng_from_seed(0),
        }
    }

    pub fn mode(&self) -> LanderMode {
        self.mode
    }

    pub fn state(&self) -> LanderState {
        self.state
    }

    pub fn set_state(&mut self, state: LanderState, step_index: usize) {
        self.state = state;
        self.steps = step_index;
        self.done = false;
    }

    fn decode(&self, action: &Action) -> Result<Thrust> {
        match (self.mode, action) {
            (LanderMode::Discrete, Action::Discrete(a)) => match a {
                0 => Ok(Thrust::IDLE),
                1 => Ok(Thrust {
                    main: 0.0,
                    lateral: LATERAL_ACCEL,
                }),
                2 => Ok(Thrust {
                    main: 1.0,
                    lateral: 0.0,
                }),
                3 => Ok(Thrust {
                    main: 0.0,
                    lateral: -LATERAL_ACCEL,
                }),
                _ => Err(Error::Input(format!("lander accepts discrete actions 0..=3, got {a}"))),
            },
            (LanderMode::Continuous, Action::Continuous(c)) => {
                if c.len() != 2 {
                    return Err(Error::Input(format!(
                        "continuous lander expects 2 action components, got {}",
                        c.len()
                    )));
                }
                if let Some(v) = c.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
                    return Err(Error::Input(format!("action component {v} outside [-1, 1]")));
                }
                let main = if c[0] > 0.0 { c[0] } else { 0.0 };
                let lateral = if c[1].abs() > LATERAL_DEAD_ZONE {
                    c[1] * LATERAL_ACCEL
                } else {
                    0.0
                };
                Ok(Thrust { main, lateral })
            }
            (mode, other) => Err(Error::Input(format!("{mode:?} lander cannot take action {other:?}"))),
        }
    }

    fn advance(&mut self, thrust: Thrust) -> StepResult {
        let before = self.state;
        let s = &mut self.state;
        let ax = thrust.lateral;
        let ay = thrust.main * MAIN_ACCEL - GRAVITY;
        s.x += TAU * before.x_dot;
        s.y += TAU * before.y_dot;
        s.x_dot += TAU * ax;
        s.y_dot += TAU * ay;
        self.steps += 1;

        let mut reward = s.potential() - before.potential() - MAIN_ENGINE_COST * thrust.main;
        if s.x.abs() > X_BOUND || s.y > Y_MAX {
            reward += CRASH_PENALTY;
            self.done = true;
        } else if s.y <= 0.0 {
            s.touched_down = true;
            if s.y_dot.abs() >= SAFE_SPEED {
                reward += CRASH_PENALTY;
            } else if s.x.abs() < PAD_HALF_WIDTH {
                reward += LANDING_BONUS;
            }
            self.done = true;
        } else if self.steps >= MAX_STEPS {
            self.done = true;
        }
        StepResult {
            observation: s.to_vec(),
            reward,
            done: self.done,
        }
    }
}

impl Environment for Lander {
    fn state_dim(&self) -> usize {
        STATE_DIM
    }

    fn action_spec(&self) -> ActionSpec {
        match self.mode {
            LanderMode::Discrete => ActionSpec::Discrete(4),
            LanderMode::Continuous => ActionSpec::Continuous(2),
        }
    }

    fn reset(&mut self, seed: EnvSeed) -> EnvState {
        self.rng = rng_from_seed(seed.0);
        self.state = LanderState {
            x: self.rng.random_range(-START_X_RANGE..=START_X_RANGE),
            y: START_HEIGHT,
            x_dot: self.rng.random_range(-START_VX_RANGE..=START_VX_RANGE),
            y_dot: self.rng.random_range(-START_VY_RANGE..=0.0),
            touched_down: false,
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
            return Err(Error::Contract("lander stepped after episode end; call reset".into()));
        }
        let thrust = self.decode(action)?;
        Ok(self.advance(thrust))
    }
}
