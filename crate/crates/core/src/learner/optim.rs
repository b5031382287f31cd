use alloc::vec;
use alloc::vec::Vec;

use super::network::{Gradients, QNetwork};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

/// Gradient-descent state for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, net: &QNetwork) -> Self {
        let shapes: Vec<usize> = net.layers.iter().flat_map(|l| [l.w.len(), l.b.len()]).collect();
        let zeros = || shapes.iter().map(|&n| vec![0.0; n]).collect::<Vec<_>>();
        let (m, v) = match kind {
            OptimizerKind::Adam => (zeros(), zeros()),
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
        };
        Self { kind, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m, v }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn apply(&mut self, net: &mut QNetwork, grads: &Gradients) {
        self.t = self.t.saturating_add(1);
        let grads = grads.w.iter().zip(&grads.b).flat_map(|(w, b)| [w, b]);
        let params = net.params_mut().flat_map(|(w, b)| [w, b]);
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.zip(grads) {
                    for (pi, gi) in p.iter_mut().zip(g) {
                        *pi -= self.lr * gi;
                    }
                }
            }
            OptimizerKind::Adam => {
                let (b1, b2) = (self.beta1, self.beta2);
                let c1 = 1.0 - math::powi(b1, self.t);
                let c2 = 1.0 - math::powi(b2, self.t);
                let step = self.lr * math::sqrt(c2) / c1;
                let eps = self.eps * math::sqrt(c2);
                for (((p, g), m), v) in params.zip(grads).zip(self.m.iter_mut()).zip(self.v.iter_mut()) {
                    for k in 0..p.len() {
                        let gk = g[k];
                        m[k] = b1 * m[k] + (1.0 - b1) * gk;
                        v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
                        p[k] -= step * m[k] / (math::sqrt(v[k]) + eps);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut net = QNetwork::zeros(&[2, 2]).unwrap();
        let mut g = Gradients::zeros_like(&net);
        g.w[0][0] = 3.0;
        g.b[0][1] = -0.01;
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.001, &net);
        opt.apply(&mut net, &g);
        let p = net.flat_params();
        assert!((p[0] + 0.001).abs() < 1e-9);
        assert!((p[5] - 0.001).abs() < 1e-6);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn sgd_step() {
        let mut net = QNetwork::zeros(&[2, 2]).unwrap();
        let mut g = Gradients::zeros_like(&net);
        g.w[0][3] = 2.0;
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, &net);
        opt.apply(&mut net, &g);
        assert!((net.flat_params()[3] + 0.2).abs() < 1e-15);
    }
}
