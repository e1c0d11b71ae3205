//! Central finite-difference check of the full loss gradient in f64.

use crate::loss::{ppo_loss, LossBatch, LossConfig};
use crate::policy::Policy;
use hasard_core::rng::Rng;

pub const STEP: f64 = 1e-4;

/// Gradients smaller than this in both estimates are compared absolutely.
const TINY: f64 = 1e-7;

/// Distance a sample must keep from any loss kink so that `±STEP` probes
/// stay on one side of it.
const KINK_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct GradCheckCase {
    pub policy: Policy<f64>,
    pub batch: LossBatch<f64>,
    pub cfg: LossConfig,
}

/// Random small network and batch. The rollout-time policy is a perturbed
/// copy so ratios spread across both clip bounds.
pub fn random_case(seed: u64) -> GradCheckCase {
    let mut rng = Rng::new(seed);
    loop {
        let obs_dim = 2 + rng.index(5);
        let hidden: Vec<usize> = (0..1 + rng.index(2)).map(|_| 2 + rng.index(6)).collect();
        let groups: Vec<usize> = (0..1 + rng.index(3)).map(|_| 2 + rng.index(3)).collect();
        let n = 1 + rng.index(8);
        let policy: Policy<f64> = Policy::new(obs_dim, &hidden, &groups, 1.0, &mut rng);
        let mut old = policy.clone();
        for p in old.net.params.iter_mut() {
            *p += rng.range(-0.15, 0.15);
        }
        let obs: Vec<f64> = (0..n * obs_dim).map(|_| rng.range(-2.0, 2.0)).collect();
        let actions: Vec<usize> = (0..n).flat_map(|_| groups.iter().map(|&g| rng.index(g)).collect::<Vec<_>>()).collect();
        let old_heads = old.forward(&obs, n);
        let ng = groups.len();
        let batch = LossBatch {
            old_log_prob: (0..n).map(|i| old.joint_log_prob(&old_heads, i, &actions[i * ng..(i + 1) * ng])).collect(),
            advantages: (0..n).map(|_| rng.range(-2.0, 2.0)).collect(),
            target_r: (0..n).map(|_| rng.range(-3.0, 3.0)).collect(),
            target_c: (0..n).map(|_| rng.range(-3.0, 3.0)).collect(),
            old_v_r: (0..n).map(|_| rng.range(-3.0, 3.0)).collect(),
            old_v_c: (0..n).map(|_| rng.range(-3.0, 3.0)).collect(),
            obs,
            actions,
        };
        let cfg = LossConfig { entropy_coeff: 0.01, ..LossConfig::default() };
        let case = GradCheckCase { policy, batch, cfg };
        if clear_of_kinks(&case) {
            return case;
        }
    }
}

fn clear_of_kinks(case: &GradCheckCase) -> bool {
    let b = &case.batch;
    let n = b.len();
    let heads = case.policy.forward(&b.obs, n);
    let ng = case.policy.groups().len();
    let (lo, hi) = case.cfg.ratio_bounds();
    let delta = case.cfg.value_clip;
    for i in 0..n {
        let lp = case.policy.joint_log_prob(&heads, i, &b.actions[i * ng..(i + 1) * ng]);
        let r = (lp - b.old_log_prob[i]).exp();
        if (r - lo).abs() < KINK_MARGIN || (r - hi).abs() < KINK_MARGIN {
            return false;
        }
        for (v, old, t) in [(heads.value_r[i], b.old_v_r[i], b.target_r[i]), (heads.value_c[i], b.old_v_c[i], b.target_c[i])] {
            let d = v - old;
            if (d.abs() - delta).abs() < KINK_MARGIN {
                return false;
            }
            let u = v - t;
            let w = old + d.clamp(-delta, delta) - t;
            if (u * u - w * w).abs() < KINK_MARGIN {
                return false;
            }
        }
    }
    true
}

/// Analytic and numeric gradients of every parameter.
pub fn gradients(case: &GradCheckCase) -> (Vec<f64>, Vec<f64>) {
    let mut analytic = vec![0.0; case.policy.net.len()];
    ppo_loss(&case.policy, &case.batch, &case.cfg, Some(&mut analytic));
    let mut probe = case.policy.clone();
    let numeric = (0..analytic.len())
        .map(|j| {
            let base = probe.net.params[j];
            probe.net.params[j] = base + STEP;
            let up = ppo_loss(&probe, &case.batch, &case.cfg, None).total;
            probe.net.params[j] = base - STEP;
            let down = ppo_loss(&probe, &case.batch, &case.cfg, None).total;
            probe.net.params[j] = base;
            (up - down) / (2.0 * STEP)
        })
        .collect();
    (analytic, numeric)
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    let scale = a.abs().max(n.abs());
    if scale < TINY {
        (a - n).abs() / TINY
    } else {
        (a - n).abs() / scale
    }
}

/// Largest relative error over all parameters of the case built from `seed`.
pub fn gradient_check(seed: u64) -> f64 {
    let (a, n) = gradients(&random_case(seed));
    a.iter().zip(&n).map(|(&a, &n)| relative_error(a, n)).fold(0.0, f64::max)
}
