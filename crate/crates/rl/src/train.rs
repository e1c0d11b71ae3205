//! Rollout collection, advantage estimation and the PPO update loop.

use crate::control::{lagrange_update, pid_update, shape_cost_reward, LagrangeState, PidState};
use crate::gae::compute_gae;
use crate::loss::{ppo_loss, LossBatch, LossConfig, LossStats};
use crate::norm::RunningNorm;
use crate::optim::{clip_grad_norm, Adam};
use crate::policy::Policy;
use crate::TrainError;
use hasard_core::env::{ActionEncoding, EnvSpec, Observation, VecEnv};
use hasard_core::rng::{derive_seed, Rng};
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Ppo,
    /// Cost subtracted from the reward, scaled by `TrainConfig::cost_scale`.
    PpoCost,
    PpoLag,
    PpoPid,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ppo, Method::PpoCost, Method::PpoLag, Method::PpoPid];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ppo => "ppo",
            Method::PpoCost => "ppocost",
            Method::PpoLag => "ppolag",
            Method::PpoPid => "ppopid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, TrainError> {
        let lower = s.to_ascii_lowercase();
        Method::ALL.into_iter().find(|m| m.name() == lower).ok_or_else(|| {
            let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
            TrainError::Config(format!("unknown method '{s}'; valid methods: {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub method: Method,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub loss: LossConfig,
    pub lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub max_grad_norm: f64,
    pub kl_threshold: f64,
    pub num_envs: usize,
    pub rollout: usize,
    pub epochs: usize,
    pub minibatches: usize,
    pub hidden: Vec<usize>,
    pub init_gain: f64,
    /// κ for PPOCost.
    pub cost_scale: f64,
    pub lagrange_lr: f64,
    pub lambda_init: f64,
    pub pid_kp: f64,
    pub pid_ki: f64,
    pub pid_kd: f64,
    /// Divide the combined advantage by (1 + λ).
    pub lambda_normalize: bool,
    pub normalize_returns: bool,
    /// Completed episodes averaged into the cost estimate for the multiplier.
    pub cost_window: usize,
    /// Step the multiplier only after updates that completed new episodes,
    /// instead of after every update.
    pub fresh_multiplier: bool,
    /// Completed episodes averaged into the logged return and cost.
    pub stats_window: usize,
    /// Updates between log rows.
    pub log_every: usize,
    pub workers: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Ppo,
            gamma: 0.99,
            gae_lambda: 0.95,
            loss: LossConfig::default(),
            lr: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-6,
            max_grad_norm: 4.0,
            kl_threshold: 0.01,
            num_envs: 32,
            rollout: 32,
            epochs: 1,
            minibatches: 1,
            hidden: vec![512, 512],
            init_gain: 1.0,
            cost_scale: 1.0,
            lagrange_lr: 1e-2,
            lambda_init: 0.0,
            pid_kp: 0.1,
            pid_ki: 0.01,
            pid_kd: 0.01,
            lambda_normalize: true,
            normalize_returns: true,
            cost_window: 32,
            fresh_multiplier: false,
            stats_window: 100,
            log_every: 1,
            workers: 1,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, TrainError> {
    value.parse().map_err(|_| TrainError::Config(format!("bad value '{value}' for {key}")))
}

impl TrainConfig {
    pub fn batch_size(&self) -> usize {
        self.num_envs * self.rollout
    }

    /// Sets one field from its text form. Returns `Ok(false)` for keys this
    /// config does not own.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, TrainError> {
        match key {
            "method" => self.method = value.parse()?,
            "gamma" => self.gamma = parse(key, value)?,
            "gae_lambda" => self.gae_lambda = parse(key, value)?,
            "clip" => self.loss.clip = parse(key, value)?,
            "value_clip" => self.loss.value_clip = parse(key, value)?,
            "value_coeff" => self.loss.value_coeff = parse(key, value)?,
            "entropy_coeff" => self.loss.entropy_coeff = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "adam_beta1" => self.adam_beta1 = parse(key, value)?,
            "adam_beta2" => self.adam_beta2 = parse(key, value)?,
            "adam_eps" => self.adam_eps = parse(key, value)?,
            "max_grad_norm" => self.max_grad_norm = parse(key, value)?,
            "kl_threshold" => self.kl_threshold = parse(key, value)?,
            "num_envs" => self.num_envs = parse(key, value)?,
            "rollout" => self.rollout = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "minibatches" => self.minibatches = parse(key, value)?,
            "hidden" => {
                self.hidden = value.split(',').filter(|s| !s.is_empty()).map(|s| parse(key, s.trim())).collect::<Result<_, _>>()?
            }
            "init_gain" => self.init_gain = parse(key, value)?,
            "cost_scale" => self.cost_scale = parse(key, value)?,
            "lagrange_lr" => self.lagrange_lr = parse(key, value)?,
            "lambda_init" => self.lambda_init = parse(key, value)?,
            "pid_kp" => self.pid_kp = parse(key, value)?,
            "pid_ki" => self.pid_ki = parse(key, value)?,
            "pid_kd" => self.pid_kd = parse(key, value)?,
            "lambda_normalize" => self.lambda_normalize = parse(key, value)?,
            "normalize_returns" => self.normalize_returns = parse(key, value)?,
            "cost_window" => self.cost_window = parse(key, value)?,
            "fresh_multiplier" => self.fresh_multiplier = parse(key, value)?,
            "stats_window" => self.stats_window = parse(key, value)?,
            "log_every" => self.log_every = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "train_seed" => self.seed = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// `key=value` lines accepted back by [`TrainConfig::set`].
    pub fn to_kv(&self) -> String {
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        let pairs: Vec<(&str, String)> = vec![
            ("method", self.method.to_string()),
            ("gamma", self.gamma.to_string()),
            ("gae_lambda", self.gae_lambda.to_string()),
            ("clip", self.loss.clip.to_string()),
            ("value_clip", self.loss.value_clip.to_string()),
            ("value_coeff", self.loss.value_coeff.to_string()),
            ("entropy_coeff", self.loss.entropy_coeff.to_string()),
            ("lr", self.lr.to_string()),
            ("adam_beta1", self.adam_beta1.to_string()),
            ("adam_beta2", self.adam_beta2.to_string()),
            ("adam_eps", self.adam_eps.to_string()),
            ("max_grad_norm", self.max_grad_norm.to_string()),
            ("kl_threshold", self.kl_threshold.to_string()),
            ("num_envs", self.num_envs.to_string()),
            ("rollout", self.rollout.to_string()),
            ("epochs", self.epochs.to_string()),
            ("minibatches", self.minibatches.to_string()),
            ("hidden", hidden.join(",")),
            ("init_gain", self.init_gain.to_string()),
            ("cost_scale", self.cost_scale.to_string()),
            ("lagrange_lr", self.lagrange_lr.to_string()),
            ("lambda_init", self.lambda_init.to_string()),
            ("pid_kp", self.pid_kp.to_string()),
            ("pid_ki", self.pid_ki.to_string()),
            ("pid_kd", self.pid_kd.to_string()),
            ("lambda_normalize", self.lambda_normalize.to_string()),
            ("normalize_returns", self.normalize_returns.to_string()),
            ("cost_window", self.cost_window.to_string()),
            ("fresh_multiplier", self.fresh_multiplier.to_string()),
            ("stats_window", self.stats_window.to_string()),
            ("log_every", self.log_every.to_string()),
            ("workers", self.workers.to_string()),
            ("train_seed", self.seed.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if self.num_envs == 0 || self.rollout == 0 {
            return bad("num_envs and rollout must be positive");
        }
        if self.epochs == 0 || self.minibatches == 0 || self.minibatches > self.batch_size() {
            return bad("epochs and minibatches must be positive and minibatches at most the batch size");
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return bad("hidden layer sizes must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gamma and gae_lambda must lie in [0, 1]");
        }
        if [self.cost_scale, self.lagrange_lr, self.lambda_init, self.pid_kp, self.pid_ki, self.pid_kd].iter().any(|&x| !(x >= 0.0)) {
            return bad("cost_scale, multiplier rate, initial multiplier and PID gains must be non-negative");
        }
        if self.cost_window == 0 || self.stats_window == 0 || self.log_every == 0 {
            return bad("windows and log_every must be positive");
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow {
    pub step: u64,
    /// Rolling mean of raw episode returns; NaN until an episode finishes.
    pub ret: f64,
    pub cost: f64,
    pub lambda: f64,
    pub pi_loss: f64,
    pub v_loss: f64,
    pub vc_loss: f64,
    pub entropy: f64,
    pub kl: f64,
}

pub const LOG_HEADER: &str = "step,return,cost,lambda,pi_loss,v_loss,vc_loss,entropy,kl";

impl LogRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.step, self.ret, self.cost, self.lambda, self.pi_loss, self.v_loss, self.vc_loss, self.entropy, self.kl
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub rows: Vec<LogRow>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(LOG_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }
}

/// Completed-episode totals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeTotals {
    pub ret: f64,
    pub cost: f64,
}

/// Everything needed to resume training bit-exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub policy: Policy<f32>,
    pub adam: Adam<f32>,
    pub rng_state: u64,
    pub lagrange: LagrangeState,
    pub pid: PidState,
    pub lambda: f64,
    pub norm_r: RunningNorm,
    pub norm_c: RunningNorm,
    pub steps: u64,
    pub updates: u64,
}

pub struct Trainer {
    cfg: TrainConfig,
    budget: f64,
    encoding: ActionEncoding,
    envs: VecEnv,
    obs: Vec<f32>,
    state: TrainState,
    rng: Rng,
    cost_window: VecDeque<f64>,
    stats: VecDeque<EpisodeTotals>,
    episodes: u64,
}

fn flatten(obs: &[Observation]) -> Vec<f32> {
    obs.iter().flat_map(|o| o.to_vec()).collect()
}

fn rolling_mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

impl Trainer {
    pub fn new(spec: &EnvSpec, cfg: TrainConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        let (envs, first) = VecEnv::new(spec, cfg.num_envs, cfg.workers, true)?;
        let encoding = envs.envs()[0].encoding().clone();
        let obs = flatten(&first);
        let obs_dim = obs.len() / cfg.num_envs;
        let mut rng = Rng::new(derive_seed(cfg.seed, 0x7261_696e));
        let policy: Policy<f32> = Policy::new(obs_dim, &cfg.hidden, &encoding.group_sizes(), cfg.init_gain, &mut rng);
        let adam = Adam::new(policy.net.len(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        let state = TrainState {
            policy,
            adam,
            rng_state: rng.state(),
            lagrange: LagrangeState { lambda: cfg.lambda_init },
            pid: PidState::new(cfg.pid_kp, cfg.pid_ki, cfg.pid_kd),
            lambda: match cfg.method {
                Method::PpoLag => cfg.lambda_init,
                _ => 0.0,
            },
            norm_r: RunningNorm::default(),
            norm_c: RunningNorm::default(),
            steps: 0,
            updates: 0,
        };
        Ok(Self {
            budget: spec.budget(),
            encoding,
            envs,
            obs,
            state,
            rng,
            cost_window: VecDeque::new(),
            stats: VecDeque::new(),
            episodes: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn policy(&self) -> &Policy<f32> {
        &self.state.policy
    }

    pub fn steps(&self) -> u64 {
        self.state.steps
    }

    pub fn lambda(&self) -> f64 {
        self.state.lambda
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn envs(&self) -> &VecEnv {
        &self.envs
    }

    /// Starts recording tile visits of finished episodes.
    pub fn track_heatmap(&mut self, capacity: usize) {
        self.envs.track_heatmap(capacity);
    }

    /// Totals of the most recent completed episodes, oldest first.
    pub fn recent_episodes(&self) -> impl Iterator<Item = &EpisodeTotals> {
        self.stats.iter()
    }

    pub fn state(&mut self) -> TrainState {
        self.state.rng_state = self.rng.state();
        self.state.clone()
    }

    /// Replaces the learner state (policy, optimizer, multiplier, counters).
    pub fn restore(&mut self, state: TrainState) -> Result<(), TrainError> {
        let cur = &self.state.policy;
        if state.policy.net.sizes() != cur.net.sizes() || state.policy.groups() != cur.groups() {
            return Err(TrainError::ShapeMismatch {
                expected: format!("{:?} / {:?}", cur.net.sizes(), cur.groups()),
                found: format!("{:?} / {:?}", state.policy.net.sizes(), state.policy.groups()),
            });
        }
        self.rng = Rng::from_state(state.rng_state);
        self.state = state;
        Ok(())
    }

    /// Swaps in new parameters and resets the optimizer moments.
    pub fn set_policy(&mut self, policy: Policy<f32>) -> Result<(), TrainError> {
        let mut state = self.state();
        state.adam = Adam::new(policy.net.len(), self.cfg.lr, self.cfg.adam_beta1, self.cfg.adam_beta2, self.cfg.adam_eps);
        state.policy = policy;
        self.restore(state)
    }

    /// Trains until at least `total_steps` env steps have been taken,
    /// calling `on_row` for every log row.
    pub fn run(&mut self, total_steps: u64, mut on_row: impl FnMut(&LogRow)) -> Result<TrainLog, TrainError> {
        let mut log = TrainLog::default();
        while self.state.steps < total_steps {
            let row = self.update()?;
            if self.state.updates % self.cfg.log_every as u64 == 0 || self.state.steps >= total_steps {
                on_row(&row);
                log.rows.push(row);
            }
        }
        Ok(log)
    }

    /// One rollout plus one PPO update.
    pub fn update(&mut self) -> Result<LogRow, TrainError> {
        let cfg = &self.cfg;
        let (n_env, horizon) = (cfg.num_envs, cfg.rollout);
        let policy = &self.state.policy;
        let obs_dim = policy.obs_dim();
        let ng = policy.groups().len();
        let total = n_env * horizon;
        let episodes_before = self.episodes;

        // Time-major storage: row t * n_env + e.
        let mut obs_buf = Vec::with_capacity(total * obs_dim);
        let mut act_buf = Vec::with_capacity(total * ng);
        let mut logp_buf = Vec::with_capacity(total);
        let mut vr_buf = Vec::with_capacity(total);
        let mut vc_buf = Vec::with_capacity(total);
        let mut rew_buf = Vec::with_capacity(total);
        let mut cost_buf = Vec::with_capacity(total);
        let mut done_buf = Vec::with_capacity(total);

        for _ in 0..horizon {
            let heads = policy.forward(&self.obs, n_env);
            let choices = policy.sample(&heads, &mut self.rng);
            let mut actions = Vec::with_capacity(n_env);
            for (e, c) in choices.iter().enumerate() {
                logp_buf.push(policy.joint_log_prob(&heads, e, c));
                act_buf.extend_from_slice(c);
                actions.push(self.encoding.encode(c).expect("sampled choices are in range"));
            }
            vr_buf.extend_from_slice(&heads.value_r);
            vc_buf.extend_from_slice(&heads.value_c);
            obs_buf.extend_from_slice(&self.obs);

            let results = self.envs.step(&actions);
            self.obs.clear();
            for step in results {
                let r = step.result?;
                rew_buf.push(r.reward);
                cost_buf.push(r.cost);
                done_buf.push(r.done());
                self.obs.extend(r.obs.to_vec());
                if let Some(info) = step.finished {
                    self.episodes += 1;
                    self.cost_window.push_back(info.episode_cost);
                    if self.cost_window.len() > cfg.cost_window {
                        self.cost_window.pop_front();
                    }
                    self.stats.push_back(EpisodeTotals { ret: info.episode_return, cost: info.episode_cost });
                    if self.stats.len() > cfg.stats_window {
                        self.stats.pop_front();
                    }
                }
            }
        }
        let boot = policy.forward(&self.obs, n_env);
        self.state.steps += total as u64;

        // Multiplier from the recent completed-episode costs.
        let fresh = self.episodes > episodes_before || !cfg.fresh_multiplier;
        if fresh && !self.cost_window.is_empty() {
            let j_c = rolling_mean(self.cost_window.iter().copied());
            match cfg.method {
                Method::PpoLag => {
                    self.state.lagrange = lagrange_update(self.state.lagrange, j_c, self.budget, cfg.lagrange_lr);
                    self.state.lambda = self.state.lagrange.lambda;
                }
                Method::PpoPid => {
                    let (pid, lambda) = pid_update(self.state.pid, j_c, self.budget);
                    self.state.pid = pid;
                    self.state.lambda = lambda;
                }
                Method::Ppo | Method::PpoCost => {}
            }
        }
        let lambda = self.state.lambda;

        // GAE per env in return space on both channels.
        let norm = cfg.normalize_returns;
        let denorm = |n: &RunningNorm, v: f32| if norm { n.denormalize(v as f64) } else { v as f64 };
        let mut adv_r = vec![0.0; total];
        let mut adv_c = vec![0.0; total];
        let mut ret_r = vec![0.0; total];
        let mut ret_c = vec![0.0; total];
        let mut old_vr = vec![0.0; total];
        let mut old_vc = vec![0.0; total];
        for e in 0..n_env {
            let idx: Vec<usize> = (0..horizon).map(|t| t * n_env + e).collect();
            let dones: Vec<bool> = idx.iter().map(|&i| done_buf[i]).collect();
            let rewards: Vec<f64> = idx
                .iter()
                .map(|&i| match cfg.method {
                    Method::PpoCost => shape_cost_reward(rew_buf[i], cost_buf[i], cfg.cost_scale),
                    _ => rew_buf[i],
                })
                .collect();
            let costs: Vec<f64> = idx.iter().map(|&i| cost_buf[i]).collect();
            let mut vr: Vec<f64> = idx.iter().map(|&i| denorm(&self.state.norm_r, vr_buf[i])).collect();
            vr.push(denorm(&self.state.norm_r, boot.value_r[e]));
            let mut vc: Vec<f64> = idx.iter().map(|&i| denorm(&self.state.norm_c, vc_buf[i])).collect();
            vc.push(denorm(&self.state.norm_c, boot.value_c[e]));
            let (ar, rr) = compute_gae(&rewards, &vr, &dones, cfg.gamma, cfg.gae_lambda);
            let (ac, rc) = compute_gae(&costs, &vc, &dones, cfg.gamma, cfg.gae_lambda);
            for (k, &i) in idx.iter().enumerate() {
                adv_r[i] = ar[k];
                adv_c[i] = ac[k];
                ret_r[i] = rr[k];
                ret_c[i] = rc[k];
                old_vr[i] = vr[k];
                old_vc[i] = vc[k];
            }
        }
        if norm {
            self.state.norm_r.update(&ret_r);
            self.state.norm_c.update(&ret_c);
        }
        let to_space = |n: &RunningNorm, x: f64| if norm { n.normalize(x) as f32 } else { x as f32 };

        let scale = if cfg.lambda_normalize { 1.0 + lambda } else { 1.0 };
        let mut combined: Vec<f64> = adv_r.iter().zip(&adv_c).map(|(r, c)| (r - lambda * c) / scale).collect();
        let mean = combined.iter().sum::<f64>() / total as f64;
        let std = (combined.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / total as f64).sqrt();
        combined.iter_mut().for_each(|a| *a = (*a - mean) / (std + 1e-8));

        let batch = LossBatch {
            obs: obs_buf,
            actions: act_buf,
            old_log_prob: logp_buf,
            advantages: combined.iter().map(|&a| a as f32).collect(),
            target_r: ret_r.iter().map(|&x| to_space(&self.state.norm_r, x)).collect(),
            target_c: ret_c.iter().map(|&x| to_space(&self.state.norm_c, x)).collect(),
            old_v_r: old_vr.iter().map(|&x| to_space(&self.state.norm_r, x)).collect(),
            old_v_c: old_vc.iter().map(|&x| to_space(&self.state.norm_c, x)).collect(),
        };

        let stats = self.optimize(&batch)?;
        self.state.updates += 1;
        Ok(LogRow {
            step: self.state.steps,
            ret: rolling_mean(self.stats.iter().map(|s| s.ret)),
            cost: rolling_mean(self.stats.iter().map(|s| s.cost)),
            lambda,
            pi_loss: stats.pi_loss,
            v_loss: stats.v_loss,
            vc_loss: stats.vc_loss,
            entropy: stats.entropy,
            kl: stats.kl,
        })
    }

    /// Epochs of minibatch steps with KL early stopping. Returns the mean
    /// stats of the minibatches that were applied (or of the first probe).
    fn optimize(&mut self, batch: &LossBatch<f32>) -> Result<LossStats, TrainError> {
        let cfg = &self.cfg;
        let n = batch.len();
        let obs_dim = self.state.policy.obs_dim();
        let ng = self.state.policy.groups().len();
        let mut grad = vec![0.0f32; self.state.policy.net.len()];
        let mut acc = LossStats::default();
        let mut applied = 0usize;
        let mut first: Option<LossStats> = None;
        let mut order: Vec<usize> = (0..n).collect();
        'epochs: for _ in 0..cfg.epochs {
            if cfg.minibatches > 1 {
                self.rng.shuffle(&mut order);
            }
            for mb in 0..cfg.minibatches {
                let lo = mb * n / cfg.minibatches;
                let hi = (mb + 1) * n / cfg.minibatches;
                let sub;
                let part = if cfg.minibatches == 1 {
                    batch
                } else {
                    sub = batch.select(&order[lo..hi], obs_dim, ng);
                    &sub
                };
                let stats = ppo_loss(&self.state.policy, part, &cfg.loss, Some(&mut grad));
                first.get_or_insert(stats);
                if !stats.is_finite() {
                    return Err(TrainError::NonFinite { update: self.state.updates, detail: format!("{stats:?}") });
                }
                if stats.kl > cfg.kl_threshold {
                    break 'epochs;
                }
                let gnorm = clip_grad_norm(&mut grad, cfg.max_grad_norm);
                if !gnorm.is_finite() {
                    return Err(TrainError::NonFinite { update: self.state.updates, detail: format!("gradient norm {gnorm}") });
                }
                self.state.adam.step(&mut self.state.policy.net.params, &grad);
                applied += 1;
                acc.total += stats.total;
                acc.pi_loss += stats.pi_loss;
                acc.v_loss += stats.v_loss;
                acc.vc_loss += stats.vc_loss;
                acc.entropy += stats.entropy;
                acc.kl += stats.kl;
                acc.clip_fraction += stats.clip_fraction;
            }
        }
        if applied == 0 {
            return Ok(first.unwrap_or_default());
        }
        let k = applied as f64;
        Ok(LossStats {
            total: acc.total / k,
            pi_loss: acc.pi_loss / k,
            v_loss: acc.v_loss / k,
            vc_loss: acc.vc_loss / k,
            entropy: acc.entropy / k,
            kl: acc.kl / k,
            clip_fraction: acc.clip_fraction / k,
        })
    }
}

/// Trains a fresh learner for `total_steps` env steps.
pub fn train(spec: &EnvSpec, cfg: TrainConfig, total_steps: u64) -> Result<(TrainLog, TrainState), TrainError> {
    let mut t = Trainer::new(spec, cfg)?;
    let log = t.run(total_steps, |_| {})?;
    Ok((log, t.state()))
}
