use alloc::vec::Vec;

use super::depth::{DepthProbe, RayProfile};
use super::kernel::{EmissionEvent, Kernel, Point3};
use super::{ThermalConfig, ThermalError};
use crate::geometry::{BoundingBox, Point2};
use crate::math;

#[derive(Debug, Clone, PartialEq, Default)]
struct Bucket {
    /// Events in this cell, sorted by time.
    events: Vec<EmissionEvent>,
    times: Vec<f64>,
    e_max: f64,
}

/// Superposed temperature field of an immutable event list.
///
/// Events are bucketed in a uniform spatial hash. A query first bounds the
/// rise of a whole bucket from its distance, age range and largest energy,
/// and skips buckets that cannot reach the cutoff; inside a kept bucket
/// every event below the cutoff is dropped individually.
#[derive(Debug, Clone, PartialEq)]
pub struct EventField {
    events: Vec<EmissionEvent>,
    kernel: Kernel,
    ambient: f64,
    melt: f64,
    probe: DepthProbe,
    cutoff: f64,
    cell: f64,
    origin: Point2,
    nx: usize,
    ny: usize,
    buckets: Vec<Bucket>,
}

impl EventField {
    pub fn new(events: Vec<EmissionEvent>, cfg: &ThermalConfig) -> Result<Self, ThermalError> {
        cfg.validate()?;
        let kernel = Kernel::new(&cfg.material, cfg.laser.beam_sigma_um * 1e-6, cfg.tau_min());
        let cell = cfg.hash_cell;
        let positions: Vec<Point2> = events.iter().map(|e| e.pos).collect();
        let (origin, nx, ny) = match BoundingBox::of(&positions) {
            Some(bb) => (
                bb.min,
                math::floor(bb.width() / cell) as usize + 1,
                math::floor(bb.height() / cell) as usize + 1,
            ),
            None => (Point2::new(0.0, 0.0), 0, 0),
        };
        let mut buckets = alloc::vec![Bucket::default(); nx * ny];
        for e in &events {
            let i = (math::floor((e.pos.x - origin.x) / cell) as usize).min(nx - 1);
            let j = (math::floor((e.pos.y - origin.y) / cell) as usize).min(ny - 1);
            let b = &mut buckets[j * nx + i];
            b.events.push(*e);
            b.e_max = b.e_max.max(e.energy);
        }
        for b in &mut buckets {
            b.events.sort_by(|p, q| p.time.total_cmp(&q.time));
            b.times = b.events.iter().map(|e| e.time).collect();
        }
        Ok(Self {
            events,
            kernel,
            ambient: cfg.material.ambient_temperature,
            melt: cfg.material.melt_temperature,
            probe: DepthProbe::of(cfg),
            cutoff: cfg.cutoff,
            cell,
            origin,
            nx,
            ny,
            buckets,
        })
    }

    pub fn events(&self) -> &[EmissionEvent] {
        &self.events
    }

    pub fn ambient(&self) -> f64 {
        self.ambient
    }

    pub fn melt_temperature(&self) -> f64 {
        self.melt
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub(crate) fn probe(&self) -> DepthProbe {
        self.probe
    }

    /// Visit every event emitted at or before `t` that may reach the
    /// cutoff at lateral position (`x`, `y`).
    #[inline]
    fn for_each_candidate(&self, x: f64, y: f64, t: f64, mut f: impl FnMut(&EmissionEvent)) {
        for j in 0..self.ny {
            let y0 = self.origin.y + j as f64 * self.cell;
            let dy = (y0 - y).max(y - (y0 + self.cell)).max(0.0);
            for i in 0..self.nx {
                let b = &self.buckets[j * self.nx + i];
                let n = b.times.partition_point(|&s| s <= t);
                if n == 0 {
                    continue;
                }
                if self.cutoff > 0.0 {
                    let x0 = self.origin.x + i as f64 * self.cell;
                    let dx = (x0 - x).max(x - (x0 + self.cell)).max(0.0);
                    let d = math::hypot(dx, dy);
                    let bound = self.kernel.bound(b.e_max, d, t - b.times[n - 1], t - b.times[0]);
                    if bound < self.cutoff {
                        continue;
                    }
                }
                b.events[..n].iter().for_each(&mut f);
            }
        }
    }

    /// Temperature (K) at `q` and time `t`; events emitted after `t` are
    /// ignored and events below the cutoff are skipped. Depth is taken as
    /// `max(q.z, 0)`.
    pub fn temperature_at(&self, q: Point3, t: f64) -> f64 {
        let q = Point3 { z: q.z.max(0.0), ..q };
        let mut rise = 0.0;
        self.for_each_candidate(q.x, q.y, t, |e| {
            let r = self.kernel.rise(e, q, t);
            if r >= self.cutoff {
                rise += r;
            }
        });
        self.ambient + rise
    }

    /// Temperature (K) summed over every event emitted at or before `t`,
    /// with no pruning.
    pub fn temperature_brute(&self, q: Point3, t: f64) -> f64 {
        let q = Point3 { z: q.z.max(0.0), ..q };
        self.ambient
            + self
                .events
                .iter()
                .filter(|e| e.time <= t)
                .map(|e| self.kernel.rise(e, q, t))
                .sum::<f64>()
    }

    /// Depth profile of the field on the vertical ray under `pos` at `t`.
    pub fn ray(&self, pos: Point2, t: f64) -> RayProfile {
        let mut out = RayProfile::new(self.ambient);
        self.ray_into(pos, t, &mut out);
        out
    }

    pub fn ray_into(&self, pos: Point2, t: f64, out: &mut RayProfile) {
        out.reset(self.ambient);
        self.for_each_candidate(pos.x, pos.y, t, |e| {
            let (c, w) = self.kernel.ray_term(e, pos.x, pos.y, t);
            if c >= self.cutoff {
                out.push(c, w);
            }
        });
    }
}

/// One surface temperature sample of a field snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub temperature: f64,
}

/// Surface temperatures on an `nx` by `ny` grid spanning `bbox` at time `t`.
pub fn field_snapshot(field: &EventField, bbox: BoundingBox, nx: usize, ny: usize, t: f64) -> Vec<FieldSample> {
    let step = |lo: f64, hi: f64, n: usize, k: usize| {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = step(bbox.min.y, bbox.max.y, ny, j);
        for i in 0..nx {
            let x = step(bbox.min.x, bbox.max.x, nx, i);
            out.push(FieldSample { x, y, temperature: field.temperature_at(Point3::new(x, y, 0.0), t) });
        }
    }
    out
}
