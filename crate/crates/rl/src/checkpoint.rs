//! Versioned little-endian binary dump of the learner state.

use crate::control::{LagrangeState, PidState};
use crate::net::Network;
use crate::norm::RunningNorm;
use crate::optim::Adam;
use crate::policy::Policy;
use crate::train::TrainState;
use crate::TrainError;
use sha2::{Digest, Sha256};
use std::path::Path;

const MAGIC: &[u8; 8] = b"HSRDCKPT";
pub const VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f32s(&mut self, v: &[f32]) {
        self.u64(v.len() as u64);
        for x in v {
            self.0.extend_from_slice(&x.to_le_bytes());
        }
    }
    fn usizes(&mut self, v: &[usize]) {
        self.u64(v.len() as u64);
        for &x in v {
            self.u64(x as u64);
        }
    }
}

struct Reader<'a>(&'a [u8]);

fn truncated() -> TrainError {
    TrainError::Checkpoint("truncated file".into())
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], TrainError> {
        if self.0.len() < N {
            return Err(truncated());
        }
        let (head, rest) = self.0.split_at(N);
        self.0 = rest;
        Ok(head.try_into().expect("length checked"))
    }
    fn u32(&mut self) -> Result<u32, TrainError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64, TrainError> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64, TrainError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn len(&mut self) -> Result<usize, TrainError> {
        let n = self.u64()? as usize;
        if n > self.0.len() {
            return Err(truncated());
        }
        Ok(n)
    }
    fn f32s(&mut self) -> Result<Vec<f32>, TrainError> {
        let n = self.len()?;
        (0..n).map(|_| Ok(f32::from_le_bytes(self.take()?))).collect()
    }
    fn usizes(&mut self) -> Result<Vec<usize>, TrainError> {
        let n = self.len()?;
        (0..n).map(|_| Ok(self.u64()? as usize)).collect()
    }
    fn norm(&mut self) -> Result<RunningNorm, TrainError> {
        Ok(RunningNorm { mean: self.f64()?, var: self.f64()?, count: self.f64()? })
    }
}

pub fn to_bytes(s: &TrainState) -> Vec<u8> {
    let mut w = Writer(MAGIC.to_vec());
    w.u32(VERSION);
    w.usizes(s.policy.net.sizes());
    w.usizes(s.policy.groups());
    w.f32s(&s.policy.net.params);
    for x in [s.adam.lr, s.adam.beta1, s.adam.beta2, s.adam.eps] {
        w.f64(x);
    }
    w.u64(s.adam.t);
    w.f32s(&s.adam.m);
    w.f32s(&s.adam.v);
    w.u64(s.rng_state);
    w.f64(s.lagrange.lambda);
    for x in [s.pid.kp, s.pid.ki, s.pid.kd, s.pid.integral, s.pid.prev_cost, s.lambda] {
        w.f64(x);
    }
    for n in [s.norm_r, s.norm_c] {
        w.f64(n.mean);
        w.f64(n.var);
        w.f64(n.count);
    }
    w.u64(s.steps);
    w.u64(s.updates);
    w.0
}

pub fn from_bytes(bytes: &[u8]) -> Result<TrainState, TrainError> {
    let mut r = Reader(bytes);
    if &r.take::<8>()? != MAGIC {
        return Err(TrainError::Checkpoint("not a checkpoint file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(TrainError::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let sizes = r.usizes()?;
    let groups = r.usizes()?;
    if sizes.len() < 2 || *sizes.last().expect("non-empty") != groups.iter().sum::<usize>() + 2 {
        return Err(TrainError::Checkpoint("layer sizes do not match the action groups".into()));
    }
    let mut net = Network::zeros(&sizes);
    let params = r.f32s()?;
    if params.len() != net.len() {
        return Err(TrainError::Checkpoint("parameter count does not match layer sizes".into()));
    }
    net.params = params;
    let policy = Policy::from_network(net, &groups);
    let (lr, beta1, beta2, eps) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let t = r.u64()?;
    let m = r.f32s()?;
    let v = r.f32s()?;
    if m.len() != policy.net.len() || v.len() != policy.net.len() {
        return Err(TrainError::Checkpoint("optimizer state does not match parameters".into()));
    }
    let adam = Adam { lr, beta1, beta2, eps, m, v, t };
    let rng_state = r.u64()?;
    let lagrange = LagrangeState { lambda: r.f64()? };
    let pid = PidState { kp: r.f64()?, ki: r.f64()?, kd: r.f64()?, integral: r.f64()?, prev_cost: r.f64()? };
    let lambda = r.f64()?;
    let norm_r = r.norm()?;
    let norm_c = r.norm()?;
    let steps = r.u64()?;
    let updates = r.u64()?;
    if !r.0.is_empty() {
        return Err(TrainError::Checkpoint("trailing bytes".into()));
    }
    Ok(TrainState { policy, adam, rng_state, lagrange, pid, lambda, norm_r, norm_c, steps, updates })
}

pub fn save(path: &Path, s: &TrainState) -> Result<(), TrainError> {
    std::fs::write(path, to_bytes(s))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<TrainState, TrainError> {
    from_bytes(&std::fs::read(path)?)
}

/// sha256 of the serialized parameters only.
pub fn params_hash(policy: &Policy<f32>) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in &policy.net.params {
        h.update(p.to_le_bytes());
    }
    h.finalize().into()
}
