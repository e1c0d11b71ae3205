use crate::policy::Policy;
use crate::train::EpisodeTotals;
use crate::TrainError;
use hasard_core::env::{Env, EnvSpec};
use hasard_core::rng::{derive_seed, Rng};

/// Per-episode totals and their aggregate.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub episodes: Vec<EpisodeTotals>,
    pub mean_return: f64,
    pub std_return: f64,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub budget: f64,
    /// Mean cost within the budget, inclusive.
    pub satisfied: bool,
}

impl EvalSummary {
    pub fn from_episodes(episodes: Vec<EpisodeTotals>, budget: f64) -> Self {
        let n = episodes.len().max(1) as f64;
        let mean = |f: fn(&EpisodeTotals) -> f64| episodes.iter().map(f).sum::<f64>() / n;
        let mean_return = mean(|e| e.ret);
        let mean_cost = mean(|e| e.cost);
        let std = |f: fn(&EpisodeTotals) -> f64, m: f64| (episodes.iter().map(|e| (f(e) - m).powi(2)).sum::<f64>() / n).sqrt();
        let std_return = std(|e| e.ret, mean_return);
        let std_cost = std(|e| e.cost, mean_cost);
        Self { satisfied: mean_cost <= budget, episodes, mean_return, std_return, mean_cost, std_cost, budget }
    }
}

/// Anything that picks per-group choices from an observation.
pub trait Actor {
    fn act(&mut self, obs: &[f32]) -> Vec<usize>;
}

/// Argmax (or sampled) actions from a trained policy.
pub struct PolicyActor<'a> {
    pub policy: &'a Policy<f32>,
    pub greedy: bool,
    pub rng: Rng,
}

impl Actor for PolicyActor<'_> {
    fn act(&mut self, obs: &[f32]) -> Vec<usize> {
        let heads = self.policy.forward(obs, 1);
        let mut c = if self.greedy { self.policy.greedy(&heads) } else { self.policy.sample(&heads, &mut self.rng) };
        c.pop().expect("one row")
    }
}

/// Plays `episodes` episodes; episode `k` uses seed `derive_seed(spec.seed, k)`.
pub fn evaluate(actor: &mut dyn Actor, spec: &EnvSpec, episodes: usize) -> Result<EvalSummary, TrainError> {
    let mut s = spec.clone();
    s.seed = derive_seed(spec.seed, 0);
    let (mut env, mut obs) = Env::new(s)?;
    let mut out = Vec::with_capacity(episodes);
    for k in 0..episodes {
        if k > 0 {
            obs = env.reset(derive_seed(spec.seed, k as u64));
        }
        loop {
            let choices = actor.act(&obs.to_vec());
            let r = env.step_choices(&choices)?;
            if r.done() {
                out.push(EpisodeTotals { ret: r.info.episode_return, cost: r.info.episode_cost });
                break;
            }
            obs = r.obs;
        }
    }
    Ok(EvalSummary::from_episodes(out, spec.budget()))
}

/// Greedy evaluation of `policy` after checking it fits the environment.
pub fn evaluate_policy(policy: &Policy<f32>, spec: &EnvSpec, episodes: usize) -> Result<EvalSummary, TrainError> {
    let (env, obs) = Env::new(spec.clone())?;
    let obs_dim = obs.to_vec().len();
    let groups = env.encoding().group_sizes();
    if policy.obs_dim() != obs_dim || policy.groups() != groups.as_slice() {
        return Err(TrainError::ShapeMismatch {
            expected: format!("obs {obs_dim}, groups {groups:?}"),
            found: format!("obs {}, groups {:?}", policy.obs_dim(), policy.groups()),
        });
    }
    let mut actor = PolicyActor { policy, greedy: true, rng: Rng::new(spec.seed) };
    evaluate(&mut actor, spec, episodes)
}
