use alloc::vec::Vec;

use super::field::EventField;
use super::kernel::{discretize_toolpath, EmissionSchedule};
use super::{ThermalConfig, ThermalError};
use crate::geometry::Point2;
use crate::math;
use crate::toolpath::Toolpath;

/// Temperature along one vertical ray: `ambient + sum c_i exp(-w_i z^2)`
/// with z in um.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RayProfile {
    ambient: f64,
    c: Vec<f64>,
    w: Vec<f64>,
}

impl RayProfile {
    pub fn new(ambient: f64) -> Self {
        Self { ambient, c: Vec::new(), w: Vec::new() }
    }

    pub(crate) fn reset(&mut self, ambient: f64) {
        self.ambient = ambient;
        self.c.clear();
        self.w.clear();
    }

    pub(crate) fn push(&mut self, c: f64, w: f64) {
        self.c.push(c);
        self.w.push(w);
    }

    pub fn terms(&self) -> usize {
        self.c.len()
    }

    pub fn temperature(&self, z_um: f64) -> f64 {
        let z2 = z_um * z_um;
        let rise: f64 = self.c.iter().zip(&self.w).map(|(c, w)| c * math::exp(-w * z2)).sum();
        self.ambient + rise
    }

    /// Largest depth (um) at which the ray is at or above `melt`.
    ///
    /// The ray is probed on a `pitch` grid from 0 to `max`; the last melted
    /// sample and the first unmelted one are then bisected until they are
    /// less than `refine` apart. Depths are capped at `max`.
    pub fn melt_depth(&self, melt: f64, max: f64, pitch: f64, refine: f64) -> f64 {
        let surface: f64 = self.ambient + self.c.iter().sum::<f64>();
        if surface < melt {
            return 0.0;
        }
        let n = math::floor(max / pitch + 1e-9) as usize;
        // Temperature is non-increasing in depth, so the melted samples form
        // a prefix of the grid.
        let (mut lo, mut hi) = (0usize, n + 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.temperature(mid as f64 * pitch) >= melt {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo == n {
            return max.min(n as f64 * pitch);
        }
        let (mut a, mut b) = (lo as f64 * pitch, (lo + 1) as f64 * pitch);
        while b - a > refine {
            let mid = 0.5 * (a + b);
            if self.temperature(mid) >= melt {
                a = mid;
            } else {
                b = mid;
            }
        }
        a
    }
}

/// Ray-probe settings shared by depth queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DepthProbe {
    pub max: f64,
    pub pitch: f64,
    pub refine: f64,
}

impl DepthProbe {
    pub fn of(cfg: &ThermalConfig) -> Self {
        Self { max: cfg.max_depth_um, pitch: cfg.coarse_pitch_um, refine: cfg.refine_um }
    }
}

/// Melt depth (um) on the vertical ray under `pos` at time `t`.
pub fn melt_depth(field: &EventField, pos: Point2, t: f64) -> f64 {
    let mut ray = RayProfile::default();
    depth_with(field, pos, t, &mut ray)
}

fn depth_with(field: &EventField, pos: Point2, t: f64, ray: &mut RayProfile) -> f64 {
    field.ray_into(pos, t, ray);
    let p = field.probe();
    ray.melt_depth(field.melt_temperature(), p.max, p.pitch, p.refine)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSample {
    pub step: usize,
    pub time: f64,
    pub pos: Point2,
    pub depth_um: f64,
}

/// Melt-pool depth at every laser-on emission step of a path.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeltPoolTrace {
    pub samples: Vec<DepthSample>,
}

impl MeltPoolTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn depths(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.depth_um).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthStats {
    pub avg: f64,
    pub peak: f64,
}

impl DepthStats {
    pub fn of(depths: &[f64]) -> Result<Self, ThermalError> {
        if depths.is_empty() {
            return Err(ThermalError::EmptyTrace);
        }
        let avg = depths.iter().sum::<f64>() / depths.len() as f64;
        let peak = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { avg, peak })
    }
}

pub fn depth_stats(trace: &MeltPoolTrace) -> Result<DepthStats, ThermalError> {
    DepthStats::of(&trace.depths())
}

/// A path's emission schedule with its field, ready for depth queries.
///
/// The depth reported for a step is the deepest point of the pool around
/// the beam: rays are probed under the current emission point and under
/// every earlier emission point within `pool_window_um` of path distance
/// behind it, all at the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSimulation {
    schedule: EmissionSchedule,
    field: EventField,
    window_mm: f64,
}

impl ThermalSimulation {
    pub fn new(path: &Toolpath, cfg: &ThermalConfig) -> Result<Self, ThermalError> {
        cfg.validate()?;
        Self::from_schedule(discretize_toolpath(path, &cfg.laser, cfg.dt), cfg)
    }

    pub fn from_schedule(schedule: EmissionSchedule, cfg: &ThermalConfig) -> Result<Self, ThermalError> {
        let field = EventField::new(schedule.events.clone(), cfg)?;
        Ok(Self { schedule, field, window_mm: cfg.pool_window_um * 1e-3 })
    }

    pub fn steps(&self) -> usize {
        self.schedule.len()
    }

    pub fn schedule(&self) -> &EmissionSchedule {
        &self.schedule
    }

    pub fn field(&self) -> &EventField {
        &self.field
    }

    pub fn depth_at_step(&self, k: usize) -> f64 {
        let mut ray = RayProfile::default();
        self.depth_at_step_with(k, &mut ray)
    }

    /// As [`Self::depth_at_step`], reusing `ray` as scratch space.
    pub fn depth_at_step_with(&self, k: usize, ray: &mut RayProfile) -> f64 {
        let events = &self.schedule.events;
        let arc = &self.schedule.arc;
        let t = events[k].time;
        let mut deepest = 0.0f64;
        for j in (0..=k).rev() {
            if arc[k] - arc[j] > self.window_mm + 1e-12 {
                break;
            }
            deepest = deepest.max(depth_with(&self.field, events[j].pos, t, ray));
        }
        deepest
    }

    pub fn sample(&self, k: usize, depth_um: f64) -> DepthSample {
        let e = &self.schedule.events[k];
        DepthSample { step: k, time: e.time, pos: e.pos, depth_um }
    }

    /// Trace over every emission step, evaluated in order.
    pub fn run(&self) -> MeltPoolTrace {
        let mut ray = RayProfile::default();
        let samples = (0..self.steps())
            .map(|k| self.sample(k, self.depth_at_step_with(k, &mut ray)))
            .collect();
        MeltPoolTrace { samples }
    }
}

/// Melt-pool trace of `path`.
pub fn simulate(path: &Toolpath, cfg: &ThermalConfig) -> Result<MeltPoolTrace, ThermalError> {
    Ok(ThermalSimulation::new(path, cfg)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::{LaserParams, Point3};
    use crate::toolpath::MoveKind;

    fn line(len: f64) -> Toolpath {
        let mut p = Toolpath::new(0.05);
        p.push(0, Point2::new(0.0, 0.0), MoveKind::Start);
        p.push(1, Point2::new(len, 0.0), MoveKind::Laser);
        p
    }

    #[test]
    fn stats_of_small_traces() {
        assert_eq!(DepthStats::of(&[45.0, 45.0, 45.0]).unwrap(), DepthStats { avg: 45.0, peak: 45.0 });
        assert_eq!(DepthStats::of(&[40.0, 50.0, 90.0]).unwrap(), DepthStats { avg: 60.0, peak: 90.0 });
        assert_eq!(DepthStats::of(&[]), Err(ThermalError::EmptyTrace));
    }

    #[test]
    fn empty_field_has_no_melt() {
        let f = EventField::new(Vec::new(), &ThermalConfig::default()).unwrap();
        assert_eq!(melt_depth(&f, Point2::new(0.0, 0.0), 1.0), 0.0);
    }

    #[test]
    fn ray_depth_matches_dense_scan() {
        let cfg = ThermalConfig::default();
        let sim = ThermalSimulation::new(&line(1.0), &cfg).unwrap();
        let k = sim.steps() - 1;
        let e = sim.schedule().events[k];
        let d = melt_depth(sim.field(), e.pos, e.time);
        assert!(d > 0.0);
        // Oracle: walk down in 0.01 um steps with the pointwise field.
        let mut z = 0.0;
        while sim.field().temperature_at(Point3::new(e.pos.x, e.pos.y, (z + 0.01) * 1e-3), e.time) >= 1700.0 {
            z += 0.01;
        }
        assert!((d - z).abs() <= 0.1 + 0.02, "{d} vs {z}");
    }

    #[test]
    fn trace_has_one_sample_per_event_and_grows_with_power() {
        let mut last = None::<Vec<f64>>;
        for power in [25.0, 50.0, 75.0] {
            let cfg = ThermalConfig {
                laser: LaserParams { power, absorptivity: 0.6, ..LaserParams::default() },
                ..ThermalConfig::default()
            };
            let trace = simulate(&line(0.5), &cfg).unwrap();
            assert_eq!(trace.len(), 20);
            assert!(trace.samples.iter().all(|s| s.depth_um >= 0.0));
            let depths = trace.depths();
            if let Some(prev) = &last {
                assert!(depths.iter().zip(prev).all(|(d, p)| d >= p));
            }
            last = Some(depths);
        }
    }

    #[test]
    fn pool_depth_is_at_least_under_beam_depth() {
        let cfg = ThermalConfig::default();
        let sim = ThermalSimulation::new(&line(1.0), &cfg).unwrap();
        for k in 0..sim.steps() {
            let e = sim.schedule().events[k];
            assert!(sim.depth_at_step(k) >= melt_depth(sim.field(), e.pos, e.time));
        }
    }
}
