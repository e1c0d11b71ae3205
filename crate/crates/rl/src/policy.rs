//! Actor-critic: one categorical head per action group plus reward and
//! cost value heads, all on a shared trunk.

use crate::net::{Cache, Network};
use crate::real::Real;
use hasard_core::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Policy<T> {
    pub net: Network<T>,
    groups: Vec<usize>,
}

/// Per-sample view of the heads after a forward pass.
#[derive(Clone, Debug)]
pub struct HeadOutputs<T> {
    pub cache: Cache<T>,
    /// Log-probabilities, laid out like the logits.
    pub log_probs: Vec<T>,
    pub value_r: Vec<T>,
    pub value_c: Vec<T>,
}

impl<T: Real> Policy<T> {
    pub fn new(obs_dim: usize, hidden: &[usize], groups: &[usize], gain: f64, rng: &mut Rng) -> Self {
        let sizes = Self::layer_sizes(obs_dim, hidden, groups);
        Self { net: Network::orthogonal(&sizes, gain, rng), groups: groups.to_vec() }
    }

    pub fn from_network(net: Network<T>, groups: &[usize]) -> Self {
        assert_eq!(net.output_size(), groups.iter().sum::<usize>() + 2, "output layer does not match the groups");
        Self { net, groups: groups.to_vec() }
    }

    pub fn layer_sizes(obs_dim: usize, hidden: &[usize], groups: &[usize]) -> Vec<usize> {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(groups.iter().sum::<usize>() + 2);
        sizes
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn obs_dim(&self) -> usize {
        self.net.input_size()
    }

    pub fn n_logits(&self) -> usize {
        self.groups.iter().sum()
    }

    pub fn forward(&self, obs: &[T], batch: usize) -> HeadOutputs<T> {
        let cache = self.net.forward(obs, batch);
        let width = self.net.output_size();
        let nl = self.n_logits();
        let mut log_probs = Vec::with_capacity(batch * nl);
        let mut value_r = Vec::with_capacity(batch);
        let mut value_c = Vec::with_capacity(batch);
        for row in cache.output.chunks_exact(width) {
            let mut start = 0;
            for &g in &self.groups {
                log_softmax_into(&row[start..start + g], &mut log_probs);
                start += g;
            }
            value_r.push(row[nl]);
            value_c.push(row[nl + 1]);
        }
        HeadOutputs { cache, log_probs, value_r, value_c }
    }

    /// Samples one option per group for every row.
    pub fn sample(&self, heads: &HeadOutputs<T>, rng: &mut Rng) -> Vec<Vec<usize>> {
        let nl = self.n_logits();
        heads
            .log_probs
            .chunks_exact(nl)
            .map(|row| {
                let mut start = 0;
                self.groups
                    .iter()
                    .map(|&g| {
                        let lp = &row[start..start + g];
                        start += g;
                        let u = rng.next_f64();
                        let mut acc = 0.0;
                        for (i, l) in lp.iter().enumerate() {
                            acc += l.to_f64().expect("finite").exp();
                            if u < acc {
                                return i;
                            }
                        }
                        g - 1
                    })
                    .collect()
            })
            .collect()
    }

    /// Most likely option per group.
    pub fn greedy(&self, heads: &HeadOutputs<T>) -> Vec<Vec<usize>> {
        let nl = self.n_logits();
        heads
            .log_probs
            .chunks_exact(nl)
            .map(|row| {
                let mut start = 0;
                self.groups
                    .iter()
                    .map(|&g| {
                        let lp = &row[start..start + g];
                        start += g;
                        let mut best = 0;
                        for i in 1..g {
                            if lp[i] > lp[best] {
                                best = i;
                            }
                        }
                        best
                    })
                    .collect()
            })
            .collect()
    }

    /// Joint log-probability of row `i`'s choices: the sum over groups.
    pub fn joint_log_prob(&self, heads: &HeadOutputs<T>, i: usize, choices: &[usize]) -> T {
        let nl = self.n_logits();
        let row = &heads.log_probs[i * nl..(i + 1) * nl];
        let mut start = 0;
        let mut total = T::zero();
        for (&g, &c) in self.groups.iter().zip(choices) {
            total += row[start + c];
            start += g;
        }
        total
    }

    /// Summed per-group entropy of row `i`.
    pub fn entropy(&self, heads: &HeadOutputs<T>, i: usize) -> T {
        let nl = self.n_logits();
        let row = &heads.log_probs[i * nl..(i + 1) * nl];
        row.iter().fold(T::zero(), |h, &l| h - l.exp() * l)
    }

    pub fn cast<U: Real>(&self) -> Policy<U> {
        Policy { net: self.net.cast(), groups: self.groups.clone() }
    }
}

fn log_softmax_into<T: Real>(logits: &[T], out: &mut Vec<T>) {
    let m = logits.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let lse = m + logits.iter().fold(T::zero(), |s, &l| s + (l - m).exp()).ln();
    out.extend(logits.iter().map(|&l| l - lse));
}
