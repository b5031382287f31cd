use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::LearnerError;
use crate::math;

/// One fully connected layer. Weights are stored input-major
/// (`w[i * out + o]`) so the forward pass runs along contiguous rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub inp: usize,
    pub out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Multilayer perceptron with rectified hidden layers and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    dims: Vec<usize>,
    pub(crate) layers: Vec<Dense>,
}

impl QNetwork {
    /// Network with layer widths `dims`, weights and biases drawn uniformly
    /// from `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn new<R: Rng>(dims: &[usize], rng: &mut R) -> Result<Self, LearnerError> {
        let mut net = Self::zeros(dims)?;
        for layer in &mut net.layers {
            let bound = 1.0 / math::sqrt(layer.inp as f64);
            layer.w.iter_mut().for_each(|w| *w = rng.random_range(-bound..=bound));
            layer.b.iter_mut().for_each(|b| *b = rng.random_range(-bound..=bound));
        }
        Ok(net)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self, LearnerError> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(LearnerError::InvalidConfig("network needs at least two non-empty layers"));
        }
        let layers = dims
            .windows(2)
            .map(|d| Dense { inp: d[0], out: d[1], w: vec![0.0; d[0] * d[1]], b: vec![0.0; d[1]] })
            .collect();
        Ok(Self { dims: dims.to_vec(), layers })
    }

    /// Rebuild from per-layer weights given output-major (`w[o * inp + i]`,
    /// i.e. row-major `out x in` matrices) and biases.
    pub fn from_parts(dims: &[usize], weights: &[Vec<f64>], biases: &[Vec<f64>]) -> Result<Self, LearnerError> {
        let mut net = Self::zeros(dims)?;
        if weights.len() != net.layers.len() || biases.len() != net.layers.len() {
            return Err(LearnerError::ShapeMismatch("layer count differs from dims"));
        }
        for ((layer, w), b) in net.layers.iter_mut().zip(weights).zip(biases) {
            if w.len() != layer.inp * layer.out || b.len() != layer.out {
                return Err(LearnerError::ShapeMismatch("layer size differs from dims"));
            }
            if w.iter().chain(b).any(|v| !v.is_finite()) {
                return Err(LearnerError::ShapeMismatch("non-finite parameter"));
            }
            for o in 0..layer.out {
                for i in 0..layer.inp {
                    layer.w[i * layer.out + o] = w[o * layer.inp + i];
                }
            }
            layer.b.copy_from_slice(b);
        }
        Ok(net)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("at least two layers")
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Weights of layer `l` as a row-major `out x in` matrix.
    pub fn weights_row_major(&self, l: usize) -> Vec<f64> {
        let layer = &self.layers[l];
        let mut out = vec![0.0; layer.inp * layer.out];
        for i in 0..layer.inp {
            for o in 0..layer.out {
                out[o * layer.inp + i] = layer.w[i * layer.out + o];
            }
        }
        out
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        &self.layers[l].b
    }

    /// Multiply the last layer's weights and biases by `c`.
    pub fn scale_output(&mut self, c: f64) {
        let last = self.layers.last_mut().expect("at least one layer");
        last.w.iter_mut().chain(last.b.iter_mut()).for_each(|v| *v *= c);
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    pub fn forward(&self, obs: &[f64]) -> Result<Vec<f64>, LearnerError> {
        if obs.len() != self.input_dim() {
            return Err(LearnerError::DimensionMismatch { expected: self.input_dim(), got: obs.len() });
        }
        let mut ws = Workspace::default();
        self.forward_batch(obs, 1, &mut ws);
        Ok(ws.acts.last().expect("output activations").clone())
    }

    /// Index of the largest output, lowest index on ties.
    pub fn greedy_action(&self, obs: &[f64]) -> Result<usize, LearnerError> {
        Ok(argmax(&self.forward(obs)?))
    }

    /// Forward `n` row-major inputs; activations of every layer are left in
    /// `ws.acts` (`acts[0]` is the input).
    pub(crate) fn forward_batch(&self, input: &[f64], n: usize, ws: &mut Workspace) {
        ws.ensure_layers(self.layers.len() + 1);
        ws.acts[0].clear();
        ws.acts[0].extend_from_slice(input);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (head, tail) = ws.acts.split_at_mut(l + 1);
            let x = &head[l];
            let y = &mut tail[0];
            y.clear();
            y.resize(n * layer.out, 0.0);
            for s in 0..n {
                let xs = &x[s * layer.inp..(s + 1) * layer.inp];
                let ys = &mut y[s * layer.out..(s + 1) * layer.out];
                ys.copy_from_slice(&layer.b);
                for (i, &xi) in xs.iter().enumerate() {
                    if xi != 0.0 {
                        axpy(xi, &layer.w[i * layer.out..(i + 1) * layer.out], ys);
                    }
                }
                if l != last {
                    ys.iter_mut().for_each(|v| *v = v.max(0.0));
                }
            }
        }
    }

    /// Mean squared error between `Q(s_k)[a_k]` and `y_k` over a batch of
    /// row-major inputs, and its gradient.
    pub fn loss_and_gradient(
        &self,
        input: &[f64],
        actions: &[usize],
        targets: &[f64],
    ) -> Result<(f64, Gradients), LearnerError> {
        let n = actions.len();
        if n == 0 || targets.len() != n {
            return Err(LearnerError::EmptyBatch);
        }
        if input.len() != n * self.input_dim() {
            return Err(LearnerError::DimensionMismatch { expected: n * self.input_dim(), got: input.len() });
        }
        let mut ws = Workspace::default();
        let mut grads = Gradients::zeros_like(self);
        let loss = self.backprop(input, actions, targets, &mut ws, &mut grads);
        Ok((loss, grads))
    }

    /// Loss and gradient into `grads` (overwritten), reusing `ws`.
    pub(crate) fn backprop(
        &self,
        input: &[f64],
        actions: &[usize],
        targets: &[f64],
        ws: &mut Workspace,
        grads: &mut Gradients,
    ) -> f64 {
        let n = actions.len();
        self.forward_batch(input, n, ws);
        let out_dim = self.output_dim();
        let nl = self.layers.len();
        let mut loss = 0.0;
        ws.delta.clear();
        ws.delta.resize(n * out_dim, 0.0);
        {
            let q = &ws.acts[nl];
            for s in 0..n {
                let err = q[s * out_dim + actions[s]] - targets[s];
                loss += err * err;
                ws.delta[s * out_dim + actions[s]] = 2.0 * err / n as f64;
            }
        }
        loss /= n as f64;
        grads.clear();
        for l in (0..nl).rev() {
            let layer = &self.layers[l];
            let x = &ws.acts[l];
            let gw = &mut grads.w[l];
            let gb = &mut grads.b[l];
            for s in 0..n {
                let d = &ws.delta[s * layer.out..(s + 1) * layer.out];
                for (g, &dv) in gb.iter_mut().zip(d) {
                    *g += dv;
                }
                let xs = &x[s * layer.inp..(s + 1) * layer.inp];
                for (i, &xi) in xs.iter().enumerate() {
                    if xi != 0.0 {
                        axpy(xi, d, &mut gw[i * layer.out..(i + 1) * layer.out]);
                    }
                }
            }
            if l == 0 {
                break;
            }
            // Delta of the previous (rectified) layer.
            ws.next_delta.clear();
            ws.next_delta.resize(n * layer.inp, 0.0);
            for s in 0..n {
                let d = &ws.delta[s * layer.out..(s + 1) * layer.out];
                let xs = &x[s * layer.inp..(s + 1) * layer.inp];
                let nd = &mut ws.next_delta[s * layer.inp..(s + 1) * layer.inp];
                for i in 0..layer.inp {
                    if xs[i] > 0.0 {
                        nd[i] = dot(&layer.w[i * layer.out..(i + 1) * layer.out], d);
                    }
                }
            }
            core::mem::swap(&mut ws.delta, &mut ws.next_delta);
        }
        loss
    }

    /// Copy every parameter from `other` (same shape).
    pub fn copy_from(&mut self, other: &QNetwork) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.w.copy_from_slice(&b.w);
            a.b.copy_from_slice(&b.b);
        }
    }

    /// Visit every parameter with the matching gradient entry.
    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = (&mut Vec<f64>, &mut Vec<f64>)> {
        self.layers.iter_mut().map(|l| (&mut l.w, &mut l.b))
    }

    /// Flat view of all parameters, layer by layer (weights then biases).
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(&l.b).copied()).collect()
    }

    /// Set the parameter at `flat` position (as in [`Self::flat_params`]).
    pub fn set_flat_param(&mut self, mut flat: usize, value: f64) {
        for l in &mut self.layers {
            if flat < l.w.len() {
                l.w[flat] = value;
                return;
            }
            flat -= l.w.len();
            if flat < l.b.len() {
                l.b[flat] = value;
                return;
            }
            flat -= l.b.len();
        }
        panic!("parameter index out of range");
    }
}

/// Gradient of the loss with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) w: Vec<Vec<f64>>,
    pub(crate) b: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &QNetwork) -> Self {
        Self {
            w: net.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: net.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    fn clear(&mut self) {
        self.w.iter_mut().chain(self.b.iter_mut()).for_each(|v| v.iter_mut().for_each(|x| *x = 0.0));
    }

    /// Flat view in [`QNetwork::flat_params`] order.
    pub fn flat(&self) -> Vec<f64> {
        self.w.iter().zip(&self.b).flat_map(|(w, b)| w.iter().chain(b).copied()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.b).all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Scratch buffers for batched passes.
#[derive(Debug, Clone, Default)]
pub(crate) struct Workspace {
    pub acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next_delta: Vec<f64>,
}

impl Workspace {
    fn ensure_layers(&mut self, n: usize) {
        if self.acts.len() < n {
            self.acts.resize_with(n, Vec::new);
        }
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = k;
        }
    }
    best
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Plain matrix arithmetic on row-major out x in matrices.
    fn reference_forward(net: &QNetwork, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for l in 0..net.num_layers() {
            let w = net.weights_row_major(l);
            let b = net.biases(l);
            let (out, inp) = (b.len(), a.len());
            let mut z: Vec<f64> = (0..out).map(|o| b[o] + (0..inp).map(|i| w[o * inp + i] * a[i]).sum::<f64>()).collect();
            if l + 1 < net.num_layers() {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        a
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = QNetwork::zeros(&[38, 128, 128, 3]).unwrap();
        assert_eq!(net.forward(&[0.3; 38]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let net = QNetwork::zeros(&[4, 5, 3]).unwrap();
        assert_eq!(net.forward(&[0.0; 3]), Err(LearnerError::DimensionMismatch { expected: 4, got: 3 }));
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let net = QNetwork::new(&[38, 128, 128, 3], &mut rng(1)).unwrap();
        for l in &net.layers {
            let bound = 1.0 / (l.inp as f64).sqrt();
            assert!(l.w.iter().chain(&l.b).all(|v| v.abs() <= bound));
        }
    }

    #[test]
    fn row_major_round_trip() {
        let net = QNetwork::new(&[5, 7, 3], &mut rng(2)).unwrap();
        let w: Vec<_> = (0..2).map(|l| net.weights_row_major(l)).collect();
        let b: Vec<_> = (0..2).map(|l| net.biases(l).to_vec()).collect();
        assert_eq!(QNetwork::from_parts(net.dims(), &w, &b).unwrap(), net);
        assert!(QNetwork::from_parts(&[5, 6, 3], &w, &b).is_err());
    }

    /// Largest relative error between analytic and central-difference
    /// gradients on one random instance.
    fn finite_difference_error(seed: u64) -> f64 {
        let mut r = rng(seed);
        let net = QNetwork::new(&[6, 8, 8, 3], &mut r).unwrap();
        let n = 5;
        let input: Vec<f64> = (0..n * 6).map(|_| r.random_range(-1.0..1.0)).collect();
        let actions: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let targets: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..1.0)).collect();
        let (_, grads) = net.loss_and_gradient(&input, &actions, &targets).unwrap();
        let analytic = grads.flat();
        let params = net.flat_params();
        let step = 1e-6;
        let mut worst = 0.0f64;
        for (k, &p0) in params.iter().enumerate() {
            let mut probe = net.clone();
            probe.set_flat_param(k, p0 + step);
            let up = probe.loss_and_gradient(&input, &actions, &targets).unwrap().0;
            probe.set_flat_param(k, p0 - step);
            let down = probe.loss_and_gradient(&input, &actions, &targets).unwrap().0;
            let numeric = (up - down) / (2.0 * step);
            let scale = analytic[k].abs().max(numeric.abs()).max(1e-7);
            worst = worst.max((analytic[k] - numeric).abs() / scale);
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..10 {
            let err = finite_difference_error(seed);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn forward_matches_reference(seed in 0u64..10_000, c in -3.0f64..3.0) {
            let mut r = rng(seed);
            let mut net = QNetwork::new(&[38, 128, 128, 3], &mut r).unwrap();
            let x: Vec<f64> = (0..38).map(|_| r.random_range(-1.0..1.0)).collect();
            let fast = net.forward(&x).unwrap();
            let slow = reference_forward(&net, &x);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
            net.scale_output(c);
            let scaled = net.forward(&x).unwrap();
            for (a, b) in scaled.iter().zip(&fast) {
                prop_assert!((a - c * b).abs() <= 1e-12 * (c * b).abs().max(1.0));
            }
        }
    }
}
