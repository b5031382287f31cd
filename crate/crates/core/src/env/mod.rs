//! The scanning environment the agent moves in.
//!
//! The beam walks a [`SampleGrid`](crate::SampleGrid) one point per step.
//! At each point three candidate moves are offered: the coolest neighbour
//! under a decaying temperature proxy, the smoothest continuation and the
//! second smoothest. Moves that would cross melted track become laser-off
//! (void) moves; dead ends jump to the nearest unvisited point.

mod collide;
mod proxy;
mod reward;
mod scan;
mod sensitive;

pub use collide::{detect_collision, SegmentIndex};
pub use proxy::TemperatureProxy;
pub use reward::{collision_penalty, isolated_penalty, reward_main, RewardBreakdown};
pub use scan::{
    legal_moves, nearest_fallback, start_point, AgentState, CandidateAction, EpisodeSummary, ScanEnv,
    StepOutcome, Strategy,
};
pub use sensitive::{detect_sensitive_regions, is_isolated, SensitiveRegion, SensitiveReport};

use core::f64::consts::SQRT_2;

/// Length of the observation vector.
pub const OBS_DIM: usize = 38;
/// Number of actions.
pub const N_ACTIONS: usize = 3;

pub type Observation = [f64; OBS_DIM];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("episode is already complete")]
    EpisodeDone,
    #[error("action index {0} out of range")]
    InvalidAction(usize),
    #[error("sample grid is empty")]
    EmptyGrid,
    #[error("point {0} is not a legal move from the current point")]
    InvalidTarget(usize),
    #[error("start index {0} is not a grid point")]
    InvalidStart(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    /// Neighbour radius in hatch units.
    pub knn_radius: f64,
    /// Sensitive-region coefficient: two sharp turns closer than this many
    /// hatch spacings of path form a sensitive region.
    pub sensitive_coeff: f64,
    /// A point's collision count must exceed this to be penalised.
    pub collision_threshold: u32,
    /// Number of recent melt points the temperature proxy remembers.
    pub proxy_len: usize,
    /// Proxy spatial spread in hatch units.
    pub proxy_sigma: f64,
    /// Proxy memory time constant in hatch traversal times.
    pub proxy_tau: f64,
    /// Scan speed, mm/s.
    pub velocity: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            knn_radius: SQRT_2,
            sensitive_coeff: 3.0,
            collision_threshold: 3,
            proxy_len: 64,
            proxy_sigma: 2.0,
            proxy_tau: 64.0,
            velocity: 1000.0,
        }
    }
}
