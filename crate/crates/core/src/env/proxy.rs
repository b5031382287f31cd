use alloc::collections::VecDeque;

use crate::geometry::Point2;
use crate::math;

/// Cheap stand-in for the temperature field: a time-weighted sum of
/// Gaussian bumps at the most recently melted points.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureProxy {
    capacity: usize,
    sigma: f64,
    tau: f64,
    history: VecDeque<(Point2, f64)>,
    weights: alloc::vec::Vec<f64>,
    weights_at: Option<f64>,
}

impl TemperatureProxy {
    /// `capacity` points, spread `sigma` (mm), time constant `tau` (s).
    pub fn new(capacity: usize, sigma: f64, tau: f64) -> Self {
        Self {
            capacity,
            sigma,
            tau,
            history: VecDeque::with_capacity(capacity),
            weights: alloc::vec::Vec::with_capacity(capacity),
            weights_at: None,
        }
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn clear(&mut self) {
        self.history.clear();
        self.weights_at = None;
    }

    /// Record a melted point; the oldest entry is dropped when full.
    pub fn push(&mut self, p: Point2, t: f64) {
        if self.capacity == 0 {
            return;
        }
        if self.history.len() == self.capacity {
            self.history.pop_front();
        }
        self.history.push_back((p, t));
        self.weights_at = None;
    }

    fn refresh_weights(&mut self, t: f64) {
        if self.weights_at == Some(t) {
            return;
        }
        self.weights.clear();
        // Newest entry has the largest exponent; subtracting it keeps the
        // exponentials in range before normalising.
        let newest = self.history.back().map_or(t, |e| e.1);
        let mut total = 0.0;
        for &(_, ti) in &self.history {
            let w = math::exp(-(newest - ti) / self.tau);
            self.weights.push(w);
            total += w;
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        self.weights_at = Some(t);
    }

    /// Proxy value at `p` and time `t`; zero with no history.
    pub fn value(&mut self, p: Point2, t: f64) -> f64 {
        if self.history.is_empty() {
            return 0.0;
        }
        self.refresh_weights(t);
        let two_s2 = 2.0 * self.sigma * self.sigma;
        self.history
            .iter()
            .zip(&self.weights)
            .map(|(&(q, _), w)| w * math::exp(-p.dist_sq(q) / two_s2))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_history_is_zero() {
        let mut p = TemperatureProxy::new(64, 0.1, 0.0032);
        assert_eq!(p.value(Point2::new(0.3, 0.3), 1.0), 0.0);
    }

    #[test]
    fn single_point_is_plain_gaussian() {
        let mut p = TemperatureProxy::new(64, 0.1, 0.0032);
        p.push(Point2::new(0.0, 0.0), 0.0);
        let d: f64 = 0.07;
        let expected = libm::exp(-d * d / (2.0 * 0.1 * 0.1));
        assert!((p.value(Point2::new(0.07, 0.0), 5.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn decreases_moving_away() {
        let mut p = TemperatureProxy::new(64, 0.1, 0.0032);
        p.push(Point2::new(0.0, 0.0), 0.0);
        let mut last = f64::INFINITY;
        for k in 0..30 {
            let v = p.value(Point2::new(0.01 * k as f64, 0.0), 1e-3);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn weights_follow_exponential_memory() {
        let tau = 0.002;
        let mut p = TemperatureProxy::new(64, 1e6, tau);
        // With a huge spread every bump is ~1; put the query far from one
        // point by using a tiny spread instead.
        p.push(Point2::new(0.0, 0.0), 0.0);
        p.push(Point2::new(100.0, 0.0), 0.001);
        p.sigma = 1.0;
        let w_old = libm::exp(-0.001 / tau);
        let expected = w_old / (w_old + 1.0);
        assert!((p.value(Point2::new(0.0, 0.0), 0.001) - expected).abs() < 1e-12);
    }

    #[test]
    fn capacity_drops_oldest() {
        let mut p = TemperatureProxy::new(2, 0.1, 1.0);
        p.push(Point2::new(0.0, 0.0), 0.0);
        p.push(Point2::new(5.0, 0.0), 0.1);
        p.push(Point2::new(10.0, 0.0), 0.2);
        assert_eq!(p.len(), 2);
        assert!(p.value(Point2::new(0.0, 0.0), 0.2) < 1e-100);
    }
}
