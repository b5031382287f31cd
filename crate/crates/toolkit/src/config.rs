//! TOML run configuration with one section per pipeline stage.
//!
//! Every key has a default, so an empty file (or no file) is a valid
//! configuration. Unknown keys are rejected with their name.

use std::path::Path;

use anyhow::{Context, Result};
use lpbf_core::env::EnvConfig;
use lpbf_core::learner::{OptimizerKind, TrainConfig};
use lpbf_core::pathplan::PlanConfig;
use lpbf_core::thermal::{LaserParams, MaterialParams, ThermalConfig};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "LPBF_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub geometry: GeometrySection,
    pub thermal: ThermalSection,
    pub env: EnvSection,
    pub learner: LearnerSection,
    pub pathplan: PathplanSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub hatch_um: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { hatch_um: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalSection {
    pub conductivity: f64,
    pub density: f64,
    pub heat_capacity: f64,
    pub melt_temperature: f64,
    pub ambient_temperature: f64,
    pub power: f64,
    pub absorptivity: f64,
    pub beam_sigma_um: f64,
    /// Scan speed, mm/s; also sets the time scale of the environment proxy.
    pub velocity: f64,
    pub dt: f64,
    pub cutoff: f64,
    pub hash_cell: f64,
    pub pool_window_um: f64,
    pub max_depth_um: f64,
    pub coarse_pitch_um: f64,
    pub refine_um: f64,
    /// Fit the absorptivity to `target_depth_um` before simulating.
    pub calibrate: bool,
    pub target_depth_um: f64,
    pub calibration_low: f64,
    pub calibration_high: f64,
    pub calibration_length_mm: f64,
    pub template_leg_mm: f64,
    /// Path distance around a template vertex searched for the deepest pool, mm.
    pub vertex_window_mm: f64,
    /// Extra angles for the angle study, degrees.
    pub sweep_angles: Vec<f64>,
}

impl Default for ThermalSection {
    fn default() -> Self {
        let m = MaterialParams::default();
        let l = LaserParams::default();
        let t = ThermalConfig::default();
        Self {
            conductivity: m.conductivity,
            density: m.density,
            heat_capacity: m.heat_capacity,
            melt_temperature: m.melt_temperature,
            ambient_temperature: m.ambient_temperature,
            power: l.power,
            absorptivity: l.absorptivity,
            beam_sigma_um: l.beam_sigma_um,
            velocity: l.velocity,
            dt: t.dt,
            cutoff: t.cutoff,
            hash_cell: t.hash_cell,
            pool_window_um: t.pool_window_um,
            max_depth_um: t.max_depth_um,
            coarse_pitch_um: t.coarse_pitch_um,
            refine_um: t.refine_um,
            calibrate: true,
            target_depth_um: 45.0,
            calibration_low: 0.2,
            calibration_high: 0.8,
            calibration_length_mm: 2.0,
            template_leg_mm: 1.0,
            vertex_window_mm: 0.1,
            sweep_angles: vec![80.0],
        }
    }
}

impl ThermalSection {
    pub fn to_core(&self) -> ThermalConfig {
        ThermalConfig {
            material: MaterialParams {
                conductivity: self.conductivity,
                density: self.density,
                heat_capacity: self.heat_capacity,
                melt_temperature: self.melt_temperature,
                ambient_temperature: self.ambient_temperature,
            },
            laser: LaserParams {
                power: self.power,
                absorptivity: self.absorptivity,
                beam_sigma_um: self.beam_sigma_um,
                velocity: self.velocity,
            },
            dt: self.dt,
            cutoff: self.cutoff,
            hash_cell: self.hash_cell,
            pool_window_um: self.pool_window_um,
            max_depth_um: self.max_depth_um,
            coarse_pitch_um: self.coarse_pitch_um,
            refine_um: self.refine_um,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub knn_radius: f64,
    pub sensitive_coeff: f64,
    pub collision_threshold: u32,
    pub proxy_len: usize,
    pub proxy_sigma: f64,
    pub proxy_tau: f64,
}

impl Default for EnvSection {
    fn default() -> Self {
        let e = EnvConfig::default();
        Self {
            knn_radius: e.knn_radius,
            sensitive_coeff: e.sensitive_coeff,
            collision_threshold: e.collision_threshold,
            proxy_len: e.proxy_len,
            proxy_sigma: e.proxy_sigma,
            proxy_tau: e.proxy_tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerName {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerSection {
    pub learning_rate: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub target_update: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay: f64,
    pub episodes: usize,
    pub replay_capacity: usize,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerName,
    pub eval_every: usize,
    pub seed: u64,
    /// Episodes between pattern snapshots written during training.
    pub snapshot_every: usize,
}

impl Default for LearnerSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            gamma: t.gamma,
            batch_size: t.batch_size,
            target_update: t.target_update,
            epsilon_start: t.epsilon_start,
            epsilon_end: t.epsilon_end,
            epsilon_decay: t.epsilon_decay,
            episodes: t.episodes,
            replay_capacity: t.replay_capacity,
            hidden: t.hidden,
            optimizer: OptimizerName::Adam,
            eval_every: t.eval_every,
            seed: t.seed,
            snapshot_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathplanSection {
    pub island_size_mm: f64,
    pub random_seeds: usize,
    pub seed: u64,
    pub sequence_decay: f64,
    /// Longest laser-on move, hatch units.
    pub gap_threshold: f64,
    pub atg_threshold_deg: f64,
    pub chessboard_island_mm: f64,
    pub zigzag_axis: AxisName,
}

impl Default for PathplanSection {
    fn default() -> Self {
        let p = PlanConfig::default();
        Self {
            island_size_mm: p.island_size,
            random_seeds: p.random_seeds,
            seed: p.seed,
            sequence_decay: p.sequence_decay,
            gap_threshold: p.gap_threshold,
            atg_threshold_deg: 90.0,
            chessboard_island_mm: 5.0,
            zigzag_axis: AxisName::X,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub hatch_um: Option<f64>,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid configuration")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// `explicit`, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::load(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(h) = o.hatch_um {
            self.geometry.hatch_um = h;
        }
        if let Some(e) = o.episodes {
            self.learner.episodes = e;
        }
        if let Some(s) = o.seed {
            self.learner.seed = s;
            self.pathplan.seed = s;
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn hatch_mm(&self) -> f64 {
        self.geometry.hatch_um * 1e-3
    }

    pub fn env_config(&self) -> EnvConfig {
        let e = &self.env;
        EnvConfig {
            knn_radius: e.knn_radius,
            sensitive_coeff: e.sensitive_coeff,
            collision_threshold: e.collision_threshold,
            proxy_len: e.proxy_len,
            proxy_sigma: e.proxy_sigma,
            proxy_tau: e.proxy_tau,
            velocity: self.thermal.velocity,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let l = &self.learner;
        TrainConfig {
            learning_rate: l.learning_rate,
            gamma: l.gamma,
            batch_size: l.batch_size,
            target_update: l.target_update,
            epsilon_start: l.epsilon_start,
            epsilon_end: l.epsilon_end,
            epsilon_decay: l.epsilon_decay,
            episodes: l.episodes,
            replay_capacity: l.replay_capacity,
            hidden: l.hidden.clone(),
            optimizer: match l.optimizer {
                OptimizerName::Adam => OptimizerKind::Adam,
                OptimizerName::Sgd => OptimizerKind::Sgd,
            },
            eval_every: l.eval_every,
            seed: l.seed,
        }
    }

    pub fn plan_config(&self) -> PlanConfig {
        let p = &self.pathplan;
        PlanConfig {
            hatch: self.hatch_mm(),
            island_size: p.island_size_mm,
            random_seeds: p.random_seeds,
            seed: p.seed,
            sequence_decay: p.sequence_decay,
            gap_threshold: p.gap_threshold,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.geometry.hatch_um, 50.0);
        assert_eq!(c.learner.episodes, 1000);
        assert_eq!(c.learner.target_update, 80);
        assert_eq!(c.thermal.power, 50.0);
        assert_eq!(c.train_config(), TrainConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::from_toml("[learner]\nepisodez = 3\n").unwrap_err();
        assert!(format!("{err:#}").contains("episodez"), "{err:#}");
        assert!(Config::from_toml("[bogus]\n").is_err());
    }

    #[test]
    fn precedence_flag_over_file_over_default() {
        let mut c = Config::from_toml("[geometry]\nhatch_um = 40.0\n[learner]\nepisodes = 7\nseed = 3\n").unwrap();
        assert_eq!((c.geometry.hatch_um, c.learner.episodes, c.learner.seed), (40.0, 7, 3));
        c.apply(&Overrides { hatch_um: Some(60.0), episodes: None, seed: Some(9) });
        assert_eq!((c.geometry.hatch_um, c.learner.episodes, c.learner.seed, c.pathplan.seed), (60.0, 7, 9, 9));
        let d = Config::from_toml("").unwrap();
        assert_eq!(d.learner.seed, 0);
    }

    #[test]
    fn toml_round_trip() {
        let c = Config::default();
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
    }
}
