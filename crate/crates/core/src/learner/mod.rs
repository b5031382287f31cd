//! Deep Q-learning over the three scan strategies.
//!
//! A small rectifier network scores the three candidate moves of
//! [`ScanEnv`](crate::env::ScanEnv). Training follows the usual DQN loop:
//! epsilon-greedy rollouts, a ring replay memory, minibatch regression
//! onto one-step Bellman targets from a periodically synced copy.

mod network;
mod optim;
mod replay;
mod train;

pub use network::{Gradients, QNetwork};
pub use optim::{Optimizer, OptimizerKind};
pub use replay::{ReplayMemory, Transition};
pub use train::{greedy_rollout, train, Agent, train_step, train_with, EpisodeLog, Rollout, TrainOutcome, TrainingLog};

use alloc::vec;
use alloc::vec::Vec;

use crate::env::{EnvError, N_ACTIONS, OBS_DIM};
use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearnerError {
    #[error("input has {got} values, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter shapes do not match: {0}")]
    ShapeMismatch(&'static str),
    #[error("non-finite loss {loss} at update {update} (max |target| {max_target}, max |q| {max_q})")]
    NonFiniteLoss { loss: f64, update: usize, max_target: f64, max_q: f64 },
    #[error("empty or ragged batch")]
    EmptyBatch,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub batch_size: usize,
    /// Environment steps between target network syncs.
    pub target_update: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Episode constant of the exponential exploration decay.
    pub epsilon_decay: f64,
    pub episodes: usize,
    pub replay_capacity: usize,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
    /// Episodes between greedy evaluations used to keep the best policy;
    /// 0 returns the final network.
    pub eval_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            gamma: 0.99,
            batch_size: 64,
            target_update: 80,
            epsilon_start: 1.0,
            epsilon_end: 0.0,
            epsilon_decay: 200.0,
            episodes: 1000,
            replay_capacity: 1000,
            hidden: vec![128, 128],
            optimizer: OptimizerKind::Adam,
            eval_every: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = LearnerError::InvalidConfig;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(bad("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(bad("discount must lie in [0, 1)"));
        }
        if self.batch_size == 0 || self.batch_size > self.replay_capacity {
            return Err(bad("batch size must be in 1..=replay capacity"));
        }
        if self.target_update == 0 {
            return Err(bad("target update frequency must be positive"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_start)
            || !(0.0..=1.0).contains(&self.epsilon_end)
            || self.epsilon_end > self.epsilon_start
        {
            return Err(bad("exploration rates must satisfy 0 <= end <= start <= 1"));
        }
        if !(self.epsilon_decay > 0.0) {
            return Err(bad("exploration decay must be positive"));
        }
        if self.hidden.contains(&0) {
            return Err(bad("hidden layers must be non-empty"));
        }
        Ok(())
    }

    /// Layer widths from observation to action values.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = Vec::with_capacity(self.hidden.len() + 2);
        d.push(OBS_DIM);
        d.extend_from_slice(&self.hidden);
        d.push(N_ACTIONS);
        d
    }
}

/// Exploration rate for episode `n`.
pub fn epsilon(n: usize, cfg: &TrainConfig) -> f64 {
    cfg.epsilon_end + (cfg.epsilon_start - cfg.epsilon_end) * math::exp(-(n as f64) / cfg.epsilon_decay)
}

/// One-step target: `r` at a terminal transition, else `r + gamma * max q_next`.
pub fn bellman_target(r: f64, q_next: &[f64], terminal: bool, gamma: f64) -> f64 {
    if terminal {
        return r;
    }
    let best = q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    r + gamma * best
}
