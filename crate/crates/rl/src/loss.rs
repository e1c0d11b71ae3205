//! Clipped PPO surrogate with clipped value losses on both critics, and its
//! gradient with respect to the network outputs.

use crate::policy::Policy;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    /// Ratio clip ε; the ratio is clamped to [1/(1+ε), 1+ε].
    pub clip: f64,
    /// Value clip Δ around the rollout-time prediction.
    pub value_clip: f64,
    pub value_coeff: f64,
    pub entropy_coeff: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { clip: 0.1, value_clip: 1.0, value_coeff: 0.5, entropy_coeff: 0.001 }
    }
}

impl LossConfig {
    pub fn ratio_bounds(&self) -> (f64, f64) {
        (1.0 / (1.0 + self.clip), 1.0 + self.clip)
    }
}

/// One minibatch. `actions` holds one choice per group per row, flattened.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossBatch<T> {
    pub obs: Vec<T>,
    pub actions: Vec<usize>,
    pub old_log_prob: Vec<T>,
    pub advantages: Vec<T>,
    pub target_r: Vec<T>,
    pub target_c: Vec<T>,
    pub old_v_r: Vec<T>,
    pub old_v_c: Vec<T>,
}

impl<T: Real> LossBatch<T> {
    pub fn len(&self) -> usize {
        self.old_log_prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.old_log_prob.is_empty()
    }

    /// Rows `idx` gathered into a new batch.
    pub fn select(&self, idx: &[usize], obs_dim: usize, n_groups: usize) -> Self {
        let mut out = Self::default();
        for &i in idx {
            out.obs.extend_from_slice(&self.obs[i * obs_dim..(i + 1) * obs_dim]);
            out.actions.extend_from_slice(&self.actions[i * n_groups..(i + 1) * n_groups]);
            out.old_log_prob.push(self.old_log_prob[i]);
            out.advantages.push(self.advantages[i]);
            out.target_r.push(self.target_r[i]);
            out.target_c.push(self.target_c[i]);
            out.old_v_r.push(self.old_v_r[i]);
            out.old_v_c.push(self.old_v_c[i]);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossStats {
    pub total: f64,
    pub pi_loss: f64,
    pub v_loss: f64,
    pub vc_loss: f64,
    pub entropy: f64,
    /// k3 estimate of KL(old || new).
    pub kl: f64,
    pub clip_fraction: f64,
}

impl LossStats {
    pub fn is_finite(&self) -> bool {
        [self.total, self.pi_loss, self.v_loss, self.vc_loss, self.entropy, self.kl].iter().all(|v| v.is_finite())
    }
}

/// Clipped squared error and its derivative in `v`.
fn clipped_value_loss(v: f64, old: f64, target: f64, delta: f64) -> (f64, f64) {
    let diff = v - old;
    let clipped = old + diff.clamp(-delta, delta);
    let u = v - target;
    let w = clipped - target;
    if u * u >= w * w {
        (u * u, 2.0 * u)
    } else {
        let inside = diff.abs() < delta;
        (w * w, if inside { 2.0 * w } else { 0.0 })
    }
}

/// Loss = L_pi + c_v (L_vr + L_vc) - c_H H, all means over the batch.
///
/// When `grad` is given it receives dLoss/dparams (overwritten).
pub fn ppo_loss<T: Real>(policy: &Policy<T>, batch: &LossBatch<T>, cfg: &LossConfig, grad: Option<&mut [T]>) -> LossStats {
    let n = batch.len();
    if n == 0 {
        if let Some(g) = grad {
            g.iter_mut().for_each(|x| *x = T::zero());
        }
        return LossStats::default();
    }
    let heads = policy.forward(&batch.obs, n);
    let groups = policy.groups();
    let ng = groups.len();
    let nl = policy.n_logits();
    let width = nl + 2;
    let (lo, hi) = cfg.ratio_bounds();
    let inv_n = 1.0 / n as f64;

    let mut d_out = vec![T::zero(); n * width];
    let mut stats = LossStats::default();
    for i in 0..n {
        let choices = &batch.actions[i * ng..(i + 1) * ng];
        let logp = policy.joint_log_prob(&heads, i, choices).to_f64().expect("finite");
        let old = batch.old_log_prob[i].to_f64().expect("finite");
        let adv = batch.advantages[i].to_f64().expect("finite");
        let log_ratio = logp - old;
        let ratio = log_ratio.exp();
        let clipped = ratio.clamp(lo, hi);
        let s1 = ratio * adv;
        let s2 = clipped * adv;
        stats.pi_loss -= s1.min(s2) * inv_n;
        stats.kl += (ratio - 1.0 - log_ratio) * inv_n;
        if clipped != ratio {
            stats.clip_fraction += inv_n;
        }
        // d(-min)/dlogp; zero when the clipped branch is active.
        let d_logp = if s1 <= s2 { -s1 * inv_n } else { 0.0 };

        let row_lp = &heads.log_probs[i * nl..(i + 1) * nl];
        let d_row = &mut d_out[i * width..(i + 1) * width];
        let mut start = 0;
        for (&g, &c) in groups.iter().zip(choices) {
            let lp = &row_lp[start..start + g];
            let h_g: f64 = lp.iter().map(|&l| {
                let l = l.to_f64().expect("finite");
                -l.exp() * l
            }).sum();
            stats.entropy += h_g * inv_n;
            for k in 0..g {
                let l = lp[k].to_f64().expect("finite");
                let p = l.exp();
                let onehot = if k == c { 1.0 } else { 0.0 };
                let d_pi = d_logp * (onehot - p);
                // d(-c_H H)/dz_k = c_H p_k (log p_k + H_g)
                let d_ent = cfg.entropy_coeff * inv_n * p * (l + h_g);
                d_row[start + k] = T::of(d_pi + d_ent);
            }
            start += g;
        }

        let v_r = heads.value_r[i].to_f64().expect("finite");
        let v_c = heads.value_c[i].to_f64().expect("finite");
        let (lr, dr) = clipped_value_loss(v_r, batch.old_v_r[i].to_f64().expect("finite"), batch.target_r[i].to_f64().expect("finite"), cfg.value_clip);
        let (lc, dc) = clipped_value_loss(v_c, batch.old_v_c[i].to_f64().expect("finite"), batch.target_c[i].to_f64().expect("finite"), cfg.value_clip);
        stats.v_loss += lr * inv_n;
        stats.vc_loss += lc * inv_n;
        d_row[nl] = T::of(cfg.value_coeff * dr * inv_n);
        d_row[nl + 1] = T::of(cfg.value_coeff * dc * inv_n);
    }
    stats.total = stats.pi_loss + cfg.value_coeff * (stats.v_loss + stats.vc_loss) - cfg.entropy_coeff * stats.entropy;
    if let Some(g) = grad {
        policy.net.backward(&heads.cache, &d_out, g);
    }
    stats
}
