//! Dense network with ELU hidden layers, parameters in one flat buffer.

use crate::real::{matmul, Real};
use hasard_core::rng::Rng;
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs. Its weights
/// are stored row-major as `in x out`, followed by the bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    pub params: Vec<T>,
}

/// Activations kept for the backward pass.
#[derive(Clone, Debug)]
pub struct Cache<T> {
    pub batch: usize,
    input: Vec<T>,
    /// Post-activation output of each hidden layer.
    hidden: Vec<Vec<T>>,
    /// Raw output of the last layer.
    pub output: Vec<T>,
}

#[inline]
fn elu<T: Real>(z: T) -> T {
    if z > T::zero() {
        z
    } else {
        z.exp_m1()
    }
}

impl<T: Real> Network<T> {
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "a network needs at least an input and an output size");
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut total = 0;
        for w in sizes.windows(2) {
            offsets.push(total);
            total += w[0] * w[1] + w[1];
        }
        offsets.push(total);
        Self { sizes: sizes.to_vec(), offsets, params: vec![T::zero(); total] }
    }

    /// Orthogonal weights scaled by `gain`, zero biases.
    pub fn orthogonal(sizes: &[usize], gain: f64, rng: &mut Rng) -> Self {
        let mut net = Self::zeros(sizes);
        for l in 0..net.layers() {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let q = orthogonal_matrix(n_in, n_out, rng);
            let off = net.offsets[l];
            for r in 0..n_in {
                for c in 0..n_out {
                    net.params[off + r * n_out + c] = T::of(gain * q[(r, c)]);
                }
            }
        }
        net
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    fn weights(&self, l: usize) -> (&[T], &[T]) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let off = self.offsets[l];
        let w = &self.params[off..off + n_in * n_out];
        let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
        (w, b)
    }

    /// Runs a batch of row-major inputs.
    pub fn forward(&self, input: &[T], batch: usize) -> Cache<T> {
        assert_eq!(input.len(), batch * self.input_size(), "input shape");
        let mut hidden = Vec::with_capacity(self.layers() - 1);
        let mut x: &[T] = input;
        let mut output = Vec::new();
        for l in 0..self.layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (w, b) = self.weights(l);
            let mut z = Vec::with_capacity(batch * n_out);
            for _ in 0..batch {
                z.extend_from_slice(b);
            }
            matmul(batch, n_in, n_out, x, false, w, false, T::one(), &mut z);
            if l + 1 < self.layers() {
                for v in z.iter_mut() {
                    *v = elu(*v);
                }
                hidden.push(z);
                x = hidden.last().expect("just pushed");
            } else {
                output = z;
            }
        }
        Cache { batch, input: input.to_vec(), hidden, output }
    }

    /// Gradient of a scalar loss given `d_out = dL/d output`. Overwrites `grad`.
    pub fn backward(&self, cache: &Cache<T>, d_out: &[T], grad: &mut [T]) {
        assert_eq!(grad.len(), self.params.len(), "gradient buffer size");
        let batch = cache.batch;
        let mut delta = d_out.to_vec();
        for l in (0..self.layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let x: &[T] = if l == 0 { &cache.input } else { &cache.hidden[l - 1] };
            let off = self.offsets[l];
            let (gw, rest) = grad[off..].split_at_mut(n_in * n_out);
            matmul(n_in, batch, n_out, x, true, &delta, false, T::zero(), gw);
            let gb = &mut rest[..n_out];
            gb.iter_mut().for_each(|g| *g = T::zero());
            for row in delta.chunks_exact(n_out) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += *d;
                }
            }
            if l > 0 {
                let (w, _) = self.weights(l);
                let mut dx = vec![T::zero(); batch * n_in];
                matmul(batch, n_out, n_in, &delta, false, w, true, T::zero(), &mut dx);
                // ELU'(z) = 1 for z > 0, else exp(z) = elu(z) + 1.
                for (d, h) in dx.iter_mut().zip(x) {
                    if *h <= T::zero() {
                        *d *= *h + T::one();
                    }
                }
                delta = dx;
            }
        }
    }

    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            sizes: self.sizes.clone(),
            offsets: self.offsets.clone(),
            params: self.params.iter().map(|&p| U::of(p.to_f64().expect("finite"))).collect(),
        }
    }
}

/// `rows x cols` matrix with orthonormal columns (or rows, when wider than tall).
fn orthogonal_matrix(rows: usize, cols: usize, rng: &mut Rng) -> DMatrix<f64> {
    let (tall, short) = (rows.max(cols), rows.min(cols));
    let g = DMatrix::from_fn(tall, short, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    // Sign fix so the distribution is uniform over orthogonal matrices.
    let r = qr.r();
    for j in 0..short {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if rows >= cols {
        q
    } else {
        q.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_columns() {
        let mut rng = Rng::new(3);
        let net: Network<f64> = Network::orthogonal(&[6, 4, 9], 1.0, &mut rng);
        let (w, _) = net.weights(0);
        let m = DMatrix::from_row_slice(6, 4, w);
        let gram = m.transpose() * &m;
        assert!((gram - DMatrix::identity(4, 4)).abs().max() < 1e-12);
        let (w, _) = net.weights(1);
        let m = DMatrix::from_row_slice(4, 9, w);
        let gram = &m * m.transpose();
        assert!((gram - DMatrix::identity(4, 4)).abs().max() < 1e-12);
    }

    #[test]
    fn forward_matches_hand_computation() {
        let mut net: Network<f64> = Network::zeros(&[2, 2, 1]);
        // W1 = [[1, -1], [2, 0]], b1 = [0, -3], W2 = [[1], [1]], b2 = [0.5]
        net.params.copy_from_slice(&[1.0, -1.0, 2.0, 0.0, 0.0, -3.0, 1.0, 1.0, 0.5]);
        let out = net.forward(&[1.0, 1.0], 1).output;
        // z1 = [3, -4] -> h = [3, e^-4 - 1]
        let want = 3.0 + (-4.0f64).exp_m1() + 0.5;
        assert!((out[0] - want).abs() < 1e-15);
    }
}
