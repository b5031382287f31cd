use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{LaserParams, MaterialParams, ThermalError};
use crate::geometry::Point2;
use crate::math;
use crate::toolpath::Toolpath;

/// Point below the build surface: `x`, `y` in mm, `z` depth in mm (z >= 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn surface(p: Point2) -> Self {
        Self::new(p.x, p.y, 0.0)
    }

    pub fn below(p: Point2, depth_mm: f64) -> Self {
        Self::new(p.x, p.y, depth_mm)
    }
}

/// An instantaneous surface deposit of `energy` joules at `pos` (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionEvent {
    pub pos: Point2,
    pub time: f64,
    pub energy: f64,
}

/// Kernel constants shared by every event of a material and beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Kernel {
    /// 2 / (rho cp)
    pref: f64,
    a: f64,
    sigma2: f64,
    tau_min: f64,
}

impl Kernel {
    pub(crate) fn new(material: &MaterialParams, sigma_m: f64, tau_min: f64) -> Self {
        Self {
            pref: 2.0 / material.volumetric_heat(),
            a: material.diffusivity(),
            sigma2: sigma_m * sigma_m,
            tau_min,
        }
    }

    /// Surface rise `c` (K) and vertical decay `w` (1/um^2) of one event on
    /// the ray under (`x`, `y`) mm; the rise at depth z um is `c exp(-w z^2)`.
    #[inline]
    pub(crate) fn ray_term(&self, e: &EmissionEvent, x: f64, y: f64, t: f64) -> (f64, f64) {
        let tau = (t - e.time).max(self.tau_min);
        let four_a_tau = 4.0 * self.a * tau;
        let lv = self.sigma2 + 2.0 * self.a * tau;
        let dx = (x - e.pos.x) * 1e-3;
        let dy = (y - e.pos.y) * 1e-3;
        let c = self.pref * e.energy * math::exp(-(dx * dx + dy * dy) / (2.0 * lv))
            / (2.0 * PI * lv * math::sqrt(PI * four_a_tau));
        (c, 1e-12 / four_a_tau)
    }

    #[inline]
    pub(crate) fn rise(&self, e: &EmissionEvent, q: Point3, t: f64) -> f64 {
        let (c, w) = self.ray_term(e, q.x, q.y, t);
        let z = q.z * 1e3;
        c * math::exp(-w * z * z)
    }

    /// Upper bound on the rise from any event with energy at most `e_max`,
    /// age in [`tau_lo`, `tau_hi`] and lateral distance at least `d` mm.
    pub(crate) fn bound(&self, e_max: f64, d: f64, tau_lo: f64, tau_hi: f64) -> f64 {
        let tau_lo = tau_lo.max(self.tau_min);
        let tau_hi = tau_hi.max(tau_lo);
        let lv_lo = self.sigma2 + 2.0 * self.a * tau_lo;
        let lv_hi = self.sigma2 + 2.0 * self.a * tau_hi;
        let d = d * 1e-3;
        self.pref * e_max * math::exp(-d * d / (2.0 * lv_hi))
            / (2.0 * PI * lv_lo * math::sqrt(4.0 * PI * self.a * tau_lo))
    }
}

/// Temperature rise (K) at `query` and time `t` due to one event.
///
/// `sigma_m` is the beam standard deviation in metres; `tau_min` floors the
/// event age so an event can be evaluated at its own emission instant.
pub fn kernel_temp(
    event: &EmissionEvent,
    query: Point3,
    t: f64,
    material: &MaterialParams,
    sigma_m: f64,
    tau_min: f64,
) -> Result<f64, ThermalError> {
    if t < event.time {
        return Err(ThermalError::QueryBeforeEvent { t, event: event.time });
    }
    if query.z < 0.0 {
        return Err(ThermalError::NegativeDepth(query.z));
    }
    Ok(Kernel::new(material, sigma_m, tau_min).rise(event, query, t))
}

/// Emission events of a path plus timing bookkeeping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmissionSchedule {
    pub events: Vec<EmissionEvent>,
    /// Path distance (mm, laser-on and laser-off) from the start to each event.
    pub arc: Vec<f64>,
    /// Time the beam reaches the final point, s.
    pub end_time: f64,
}

impl EmissionSchedule {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn total_energy(&self) -> f64 {
        self.events.iter().map(|e| e.energy).sum()
    }
}

/// Chop every laser-on segment into `round(len / (v dt))` (at least one)
/// equal sub-intervals with one event at the middle of each; laser-off
/// segments only advance the clock.
pub fn discretize_toolpath(path: &Toolpath, laser: &LaserParams, dt: f64) -> EmissionSchedule {
    let v = laser.velocity;
    let step = v * dt;
    let mut out = EmissionSchedule::default();
    let mut clock = 0.0;
    let mut travelled = 0.0;
    for seg in path.segments() {
        let len = seg.length();
        let duration = len / v;
        if seg.laser && len > 0.0 {
            let n = (math::round(len / step) as usize).max(1);
            let energy = laser.absorptivity * laser.power * duration / n as f64;
            for i in 0..n {
                let f = (i as f64 + 0.5) / n as f64;
                out.events.push(EmissionEvent {
                    pos: seg.a + (seg.b - seg.a) * f,
                    time: clock + duration * f,
                    energy,
                });
                out.arc.push(travelled + len * f);
            }
        }
        clock += duration;
        travelled += len;
    }
    out.end_time = clock;
    out
}
