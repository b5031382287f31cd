use alloc::vec::Vec;

use super::depth::ThermalSimulation;
use super::{ThermalConfig, ThermalError};
use crate::geometry::Point2;
use crate::math;
use crate::toolpath::{MoveKind, Toolpath};

/// The eight two-leg templates, from a straight pass down to arctan(1/5).
pub const TEMPLATE_ANGLES: [f64; 8] = [180.0, 150.0, 120.0, 90.0, 60.0, 45.0, 30.0, 11.309932474020213];

/// Mean pool depth (um) over the second half of a straight scan of
/// `length` mm.
pub fn straight_scan_depth(cfg: &ThermalConfig, length: f64) -> Result<f64, ThermalError> {
    let mut path = Toolpath::new(0.0);
    path.push(0, Point2::new(0.0, 0.0), MoveKind::Start);
    path.push(1, Point2::new(length, 0.0), MoveKind::Laser);
    let sim = ThermalSimulation::new(&path, cfg)?;
    let trace = sim.run();
    let arc = &sim.schedule().arc;
    let tail: Vec<f64> = trace
        .samples
        .iter()
        .zip(arc)
        .filter(|(_, &s)| s >= 0.5 * length)
        .map(|(d, _)| d.depth_um)
        .collect();
    if tail.is_empty() {
        return Err(ThermalError::EmptyTrace);
    }
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub absorptivity: f64,
    pub depth_um: f64,
    pub iterations: usize,
}

/// Bisect the absorptivity in `bracket` until a straight scan of `length`
/// mm has steady depth `target_um`.
pub fn calibrate_absorptivity(
    cfg: &ThermalConfig,
    target_um: f64,
    bracket: (f64, f64),
    length: f64,
) -> Result<Calibration, ThermalError> {
    let depth = |a: f64| {
        let mut c = *cfg;
        c.laser.absorptivity = a;
        straight_scan_depth(&c, length)
    };
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi <= 1.0 && lo < hi) {
        return Err(ThermalError::InvalidParameter("absorptivity bracket must satisfy 0 < lo < hi <= 1"));
    }
    let (d_lo, d_hi) = (depth(lo)?, depth(hi)?);
    if !(d_lo <= target_um && target_um <= d_hi) {
        return Err(ThermalError::CalibrationOutOfRange { target: target_um, low: d_lo, high: d_hi });
    }
    let mut best = if target_um - d_lo <= d_hi - target_um {
        Calibration { absorptivity: lo, depth_um: d_lo, iterations: 0 }
    } else {
        Calibration { absorptivity: hi, depth_um: d_hi, iterations: 0 }
    };
    let mut iterations = 0;
    while hi - lo > 1e-6 && (best.depth_um - target_um).abs() > 1e-3 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let d = depth(mid)?;
        if (d - target_um).abs() < (best.depth_um - target_um).abs() {
            best = Calibration { absorptivity: mid, depth_um: d, iterations };
        }
        if d < target_um {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.iterations = iterations;
    Ok(best)
}

/// Two legs of `leg` mm meeting at the origin with turning angle `alpha`.
pub fn template_path(alpha_deg: f64, leg: f64) -> Toolpath {
    let a = alpha_deg.to_radians();
    let mut path = Toolpath::new(0.0);
    path.push(0, Point2::new(-leg, 0.0), MoveKind::Start);
    path.push(1, Point2::new(0.0, 0.0), MoveKind::Laser);
    path.push(2, Point2::new(-leg * math::cos(a), leg * math::sin(a)), MoveKind::Laser);
    path
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleDepth {
    pub angle_deg: f64,
    pub depth_um: f64,
}

/// Deepest pool within `window` mm of path distance of the vertex of each
/// template.
pub fn angle_template_study(
    angles: &[f64],
    cfg: &ThermalConfig,
    leg: f64,
    window: f64,
) -> Result<Vec<AngleDepth>, ThermalError> {
    angles
        .iter()
        .map(|&alpha| {
            if !(alpha > 0.0 && alpha <= 180.0) {
                return Err(ThermalError::InvalidParameter("template angle must lie in (0, 180]"));
            }
            let sim = ThermalSimulation::new(&template_path(alpha, leg), cfg)?;
            let arc = &sim.schedule().arc;
            let depth_um = (0..sim.steps())
                .filter(|&k| (arc[k] - leg).abs() <= window)
                .map(|k| sim.depth_at_step(k))
                .fold(0.0, f64::max);
            Ok(AngleDepth { angle_deg: alpha, depth_um })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::turning_angle;

    #[test]
    fn template_has_requested_turning_angle() {
        for alpha in TEMPLATE_ANGLES {
            let p = template_path(alpha, 1.0);
            let m = &p.moves;
            let got = turning_angle(m[1].pos - m[0].pos, m[2].pos - m[1].pos).unwrap();
            assert!((got - alpha).abs() < 1e-9, "{alpha} vs {got}");
        }
    }

    #[test]
    fn template_angles_span_straight_to_arctan_fifth() {
        assert_eq!(TEMPLATE_ANGLES.len(), 8);
        assert_eq!(TEMPLATE_ANGLES[0], 180.0);
        assert!((TEMPLATE_ANGLES[7] - libm::atan(0.2).to_degrees()).abs() < 1e-12);
    }

    #[test]
    fn rejects_angles_outside_range() {
        let cfg = ThermalConfig::default();
        assert!(angle_template_study(&[0.0], &cfg, 1.0, 0.5).is_err());
        assert!(angle_template_study(&[181.0], &cfg, 1.0, 0.5).is_err());
    }
}
