use super::{Env, EnvError, EnvSpec, Heatmap, Observation, StepInfo, StepResult};
use crate::rng::derive_seed;
use rayon::prelude::*;

/// Result of one slot in a batched step.
#[derive(Clone, Debug, PartialEq)]
pub struct VecStep {
    pub result: Result<StepResult, EnvError>,
    /// Totals of the episode that ended on this step, if any. With
    /// auto-reset the observation in `result` already belongs to the next
    /// episode.
    pub finished: Option<StepInfo>,
}

/// A batch of independent environments stepped together.
///
/// Slot `i` plays its `k`-th episode with seed
/// `derive_seed(base_seed, (i << 32) | k)`, so results do not depend on how
/// the batch is split across threads.
pub struct VecEnv {
    envs: Vec<Env>,
    episode_index: Vec<u64>,
    base_seed: u64,
    pub auto_reset: bool,
    pool: Option<rayon::ThreadPool>,
    heatmap: Option<Heatmap>,
}

fn slot_seed(base: u64, slot: usize, episode: u64) -> u64 {
    derive_seed(base, ((slot as u64) << 32) | episode)
}

impl VecEnv {
    /// `workers <= 1` steps sequentially on the calling thread.
    pub fn new(spec: &EnvSpec, n: usize, workers: usize, auto_reset: bool) -> Result<(Self, Vec<Observation>), EnvError> {
        let mut envs = Vec::with_capacity(n);
        let mut obs = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = spec.clone();
            s.seed = slot_seed(spec.seed, i, 0);
            let (e, o) = Env::new(s)?;
            envs.push(e);
            obs.push(o);
        }
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| EnvError::Config(format!("worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok((Self { envs, episode_index: vec![0; n], base_seed: spec.seed, auto_reset, pool, heatmap: None }, obs))
    }

    /// Starts collecting tile visits of every finished episode.
    pub fn track_heatmap(&mut self, capacity: usize) {
        if let Some(e) = self.envs.first() {
            let (w, h) = e.grid_size();
            self.heatmap = Some(Heatmap::with_capacity(w, h, capacity));
        }
    }

    pub fn heatmap(&self) -> Option<&Heatmap> {
        self.heatmap.as_ref()
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[Env] {
        &self.envs
    }

    pub fn action_size(&self) -> usize {
        self.envs.first().map_or(0, Env::action_size)
    }

    pub fn step(&mut self, actions: &[usize]) -> Vec<VecStep> {
        assert_eq!(actions.len(), self.envs.len(), "one action per environment");
        let base = self.base_seed;
        let auto = self.auto_reset;
        let track = self.heatmap.is_some();
        let work = |(slot, (env, ep)): (usize, (&mut Env, &mut u64)), action: usize| -> (VecStep, Option<Vec<u32>>) {
            let result = env.step(action);
            let mut finished = None;
            let mut visits = None;
            if let Ok(r) = &result {
                if r.done() {
                    finished = Some(r.info);
                    if track {
                        visits = Some(env.visits().to_vec());
                    }
                }
            }
            let result = match result {
                Ok(mut r) if auto && r.done() => {
                    *ep += 1;
                    r.obs = env.reset(slot_seed(base, slot, *ep));
                    Ok(r)
                }
                other => other,
            };
            (VecStep { result, finished }, visits)
        };

        let out: Vec<(VecStep, Option<Vec<u32>>)> = match &self.pool {
            Some(pool) => pool.install(|| {
                self.envs
                    .par_iter_mut()
                    .zip(self.episode_index.par_iter_mut())
                    .enumerate()
                    .zip(actions.par_iter())
                    .map(|(x, &a)| work(x, a))
                    .collect()
            }),
            None => self.envs.iter_mut().zip(self.episode_index.iter_mut()).enumerate().zip(actions).map(|(x, &a)| work(x, a)).collect(),
        };

        let mut steps = Vec::with_capacity(out.len());
        for (s, visits) in out {
            if let (Some(h), Some(v)) = (self.heatmap.as_mut(), visits) {
                h.push_episode(v);
            }
            steps.push(s);
        }
        steps
    }

    /// Resets one slot onto its next sub-seed.
    pub fn reset_slot(&mut self, slot: usize) -> Observation {
        self.episode_index[slot] += 1;
        let seed = slot_seed(self.base_seed, slot, self.episode_index[slot]);
        self.envs[slot].reset(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_of_one_matches_single_env() {
        let spec: EnvSpec = "scenario=detonators_dilemma seed=4".parse().unwrap();
        let (mut v, obs) = VecEnv::new(&spec, 1, 1, false).unwrap();
        let mut single = spec.clone();
        single.seed = slot_seed(spec.seed, 0, 0);
        let (mut e, o) = Env::new(single).unwrap();
        assert_eq!(obs[0], o);
        for a in [0, 5, 17, 47, 3] {
            let r = v.step(&[a]).remove(0).result.unwrap();
            assert_eq!(r, e.step(a).unwrap());
        }
    }

    #[test]
    fn auto_reset_uses_next_sub_seed() {
        let spec: EnvSpec = "scenario=collateral_damage max_steps=2 seed=1".parse().unwrap();
        let (mut v, _) = VecEnv::new(&spec, 2, 1, true).unwrap();
        v.step(&[0, 0]);
        let out = v.step(&[0, 0]);
        assert!(out[1].finished.is_some());
        let mut fresh = spec.clone();
        fresh.seed = slot_seed(1, 1, 1);
        let (_, o) = Env::new(fresh).unwrap();
        assert_eq!(out[1].result.as_ref().unwrap().obs, o);
    }
}
