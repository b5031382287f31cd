//! Transient heat conduction for arbitrary scan paths.
//!
//! Every laser-on stretch of a path is chopped into short emission events.
//! Each event is an instantaneous Gaussian surface source on an insulated
//! half-space; temperatures are the superposition of all events emitted so
//! far. Melt-pool depth is read off vertical rays where the field exceeds
//! the melting temperature.

mod depth;
mod field;
mod kernel;
mod study;

pub use depth::{
    depth_stats, melt_depth, simulate, DepthSample, DepthStats, MeltPoolTrace, RayProfile, ThermalSimulation,
};
pub use field::{field_snapshot, EventField, FieldSample};
pub use kernel::{discretize_toolpath, kernel_temp, EmissionEvent, EmissionSchedule, Point3};
pub use study::{
    angle_template_study, calibrate_absorptivity, straight_scan_depth, template_path, AngleDepth,
    Calibration, TEMPLATE_ANGLES,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThermalError {
    #[error("query time {t} s precedes event time {event} s")]
    QueryBeforeEvent { t: f64, event: f64 },
    #[error("query depth must be non-negative, got {0} mm")]
    NegativeDepth(f64),
    #[error("invalid thermal parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("melt-pool trace is empty")]
    EmptyTrace,
    #[error("calibration target {target} um is outside [{low}, {high}] um reachable in the absorptivity bracket")]
    CalibrationOutOfRange { target: f64, low: f64, high: f64 },
}

/// Thermophysical properties in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Thermal conductivity, W/(m K).
    pub conductivity: f64,
    /// Density, kg/m^3.
    pub density: f64,
    /// Specific heat capacity, J/(kg K).
    pub heat_capacity: f64,
    /// Melting temperature, K.
    pub melt_temperature: f64,
    /// Ambient (powder bed) temperature, K.
    pub ambient_temperature: f64,
}

impl MaterialParams {
    /// Bulk SS316L handbook values.
    pub const fn ss316l_bulk() -> Self {
        Self {
            conductivity: 20.0,
            density: 7950.0,
            heat_capacity: 500.0,
            melt_temperature: 1700.0,
            ambient_temperature: 300.0,
        }
    }

    /// SS316L powder bed: bulk properties with density scaled by a 0.55
    /// packing fraction.
    pub const fn ss316l_powder_bed() -> Self {
        let bulk = Self::ss316l_bulk();
        Self { density: bulk.density * 0.55, ..bulk }
    }

    /// Thermal diffusivity k / (rho cp), m^2/s.
    pub fn diffusivity(&self) -> f64 {
        self.conductivity / (self.density * self.heat_capacity)
    }

    /// Volumetric heat capacity rho cp, J/(m^3 K).
    pub fn volumetric_heat(&self) -> f64 {
        self.density * self.heat_capacity
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        let positive = [
            self.conductivity,
            self.density,
            self.heat_capacity,
            self.melt_temperature,
            self.ambient_temperature,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(ThermalError::InvalidParameter("material constants must be positive"));
        }
        if self.melt_temperature <= self.ambient_temperature {
            return Err(ThermalError::InvalidParameter("melting temperature must exceed ambient"));
        }
        Ok(())
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::ss316l_powder_bed()
    }
}

/// Beam settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Power, W.
    pub power: f64,
    /// Fraction of the power absorbed, in (0, 1].
    pub absorptivity: f64,
    /// Gaussian standard deviation of the spot, um.
    pub beam_sigma_um: f64,
    /// Scan speed, mm/s.
    pub velocity: f64,
}

impl LaserParams {
    /// 50 W, 25 um spot (sigma = diameter / 4), 1000 mm/s.
    pub const fn micro_lpbf() -> Self {
        Self { power: 50.0, absorptivity: 0.5, beam_sigma_um: 25.0 / 4.0, velocity: 1000.0 }
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(ThermalError::InvalidParameter("laser power must be positive"));
        }
        if !(self.absorptivity > 0.0 && self.absorptivity <= 1.0) {
            return Err(ThermalError::InvalidParameter("absorptivity must lie in (0, 1]"));
        }
        if !(self.beam_sigma_um > 0.0 && self.beam_sigma_um.is_finite()) {
            return Err(ThermalError::InvalidParameter("beam sigma must be positive"));
        }
        if !(self.velocity > 0.0 && self.velocity.is_finite()) {
            return Err(ThermalError::InvalidParameter("scan velocity must be positive"));
        }
        Ok(())
    }
}

impl Default for LaserParams {
    fn default() -> Self {
        Self::micro_lpbf()
    }
}

/// Everything the simulator needs besides the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalConfig {
    pub material: MaterialParams,
    pub laser: LaserParams,
    /// Emission interval, s.
    pub dt: f64,
    /// Events whose contribution at a query is below this rise (K) are
    /// skipped; 0 disables pruning.
    pub cutoff: f64,
    /// Spatial hash cell edge, mm.
    pub hash_cell: f64,
    /// Path distance behind the beam probed for the pool bottom, um.
    pub pool_window_um: f64,
    /// Deepest probed point, um.
    pub max_depth_um: f64,
    /// Coarse probe pitch, um.
    pub coarse_pitch_um: f64,
    /// Bisection stops once the bracket is narrower than this, um.
    pub refine_um: f64,
}

impl ThermalConfig {
    /// Floor on the age of an event, s.
    pub fn tau_min(&self) -> f64 {
        0.5 * self.dt
    }

    pub fn validate(&self) -> Result<(), ThermalError> {
        self.material.validate()?;
        self.laser.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ThermalError::InvalidParameter("dt must be positive"));
        }
        if !(self.cutoff >= 0.0) {
            return Err(ThermalError::InvalidParameter("cutoff must be non-negative"));
        }
        if !(self.hash_cell > 0.0) {
            return Err(ThermalError::InvalidParameter("hash cell must be positive"));
        }
        if !(self.pool_window_um >= 0.0) {
            return Err(ThermalError::InvalidParameter("pool window must be non-negative"));
        }
        if !(self.max_depth_um > 0.0 && self.coarse_pitch_um > 0.0 && self.refine_um > 0.0) {
            return Err(ThermalError::InvalidParameter("depth probe settings must be positive"));
        }
        Ok(())
    }
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            material: MaterialParams::default(),
            laser: LaserParams::default(),
            dt: 2.5e-5,
            cutoff: 0.1,
            hash_cell: 0.1,
            pool_window_um: 250.0,
            max_depth_um: 200.0,
            coarse_pitch_um: 2.0,
            refine_um: 0.1,
        }
    }
}
