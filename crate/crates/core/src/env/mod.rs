//! Episodic constrained-MDP interface over the scenarios.

mod action;
pub mod features;
mod heatmap;
mod spec;
mod vec_env;

pub use action::{ActionEncoding, ActionMode, Button, UnknownButton};
pub use features::{feature_observation, FEATURE_LEN};
pub use heatmap::{Heatmap, HEATMAP_EPISODES};
pub use spec::{default_budget, Channels, Constraint, EnvSpec, ObsMode, SPEC_KEYS};
pub use vec_env::{VecEnv, VecStep};

use crate::rng::Rng;
use crate::scenarios::{CostMode, Scenario, ScenarioError, ScenarioKind, FRAME_SKIP};
use crate::world::{raycast_render, FrameSet, HudBars, RenderSettings, World};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("episode has finished; reset before stepping again")]
    EpisodeFinished,
    #[error("action {index} is outside the action space of size {size}")]
    InvalidAction { index: usize, size: usize },
    #[error("bad action choices {0:?}")]
    InvalidChoices(Vec<usize>),
    #[error("config error: {0}")]
    Config(String),
}

impl From<ScenarioError> for EnvError {
    fn from(e: ScenarioError) -> Self {
        EnvError::Config(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observation {
    Features(Vec<f32>),
    /// Unselected channels are left empty.
    Pixels(FrameSet),
}

impl Observation {
    /// Flat vector for a policy; pixel bytes are scaled to `[0, 1]`.
    pub fn to_vec(&self) -> Vec<f32> {
        match self {
            Observation::Features(v) => v.clone(),
            Observation::Pixels(f) => f.rgb.iter().chain(&f.depth).chain(&f.labels).map(|&b| b as f32 / 255.0).collect(),
        }
    }

    pub fn features(&self) -> Option<&[f32]> {
        match self {
            Observation::Features(v) => Some(v),
            Observation::Pixels(_) => None,
        }
    }

    pub fn frames(&self) -> Option<&FrameSet> {
        match self {
            Observation::Pixels(f) => Some(f),
            Observation::Features(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    /// Sum of step rewards so far; zero once a hard constraint is violated.
    pub episode_return: f64,
    pub episode_cost: f64,
    pub violation: bool,
    pub steps: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub cost: f64,
    pub terminated: bool,
    /// Time limit reached.
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub struct Env {
    spec: EnvSpec,
    encoding: ActionEncoding,
    scenario: Scenario,
    world: World,
    rng: Rng,
    seed: u64,
    steps: u32,
    reward_sum: f64,
    cost_sum: f64,
    violation: bool,
    finished: bool,
    visits: Vec<u32>,
}

impl Env {
    /// Builds the environment and starts an episode with `spec.seed`.
    pub fn new(spec: EnvSpec) -> Result<(Env, Observation), EnvError> {
        spec.validate()?;
        let seed = spec.seed;
        let mut rng = Rng::new(seed);
        let mode = if spec.constraint.is_hard() { CostMode::Hard } else { CostMode::Soft };
        let (scenario, world) = Scenario::reset(spec.scenario, mode, &spec.options, &mut rng)?;
        let encoding = ActionEncoding::for_scenario(spec.scenario.kind, spec.action_mode);
        let visits = vec![0; world.grid.len()];
        let mut env = Env {
            spec,
            encoding,
            scenario,
            world,
            rng,
            seed,
            steps: 0,
            reward_sum: 0.0,
            cost_sum: 0.0,
            violation: false,
            finished: false,
            visits,
        };
        env.record_visit();
        let obs = env.observe();
        Ok((env, obs))
    }

    /// Starts a fresh episode. All layout and spawn draws come from a
    /// generator seeded with `seed`.
    pub fn reset(&mut self, seed: u64) -> Observation {
        self.seed = seed;
        self.rng = Rng::new(seed);
        let mode = if self.spec.constraint.is_hard() { CostMode::Hard } else { CostMode::Soft };
        let (scenario, world) = Scenario::reset(self.spec.scenario, mode, &self.spec.options, &mut self.rng)
            .expect("spec was validated when the env was built");
        self.scenario = scenario;
        self.world = world;
        self.steps = 0;
        self.reward_sum = 0.0;
        self.cost_sum = 0.0;
        self.violation = false;
        self.finished = false;
        self.visits = vec![0; self.world.grid.len()];
        self.record_visit();
        self.observe()
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn encoding(&self) -> &ActionEncoding {
        &self.encoding
    }

    pub fn action_size(&self) -> usize {
        self.encoding.size()
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn info(&self) -> StepInfo {
        StepInfo {
            episode_return: if self.violation { 0.0 } else { self.reward_sum },
            episode_cost: self.cost_sum,
            violation: self.violation,
            steps: self.steps,
        }
    }

    /// Visit counts of the current episode, one per grid tile.
    pub fn visits(&self) -> &[u32] {
        &self.visits
    }

    pub fn grid_size(&self) -> (usize, usize) {
        (self.world.grid.width(), self.world.grid.height())
    }

    /// Flat action that never incurs cost.
    pub fn safe_action(&self) -> usize {
        let a = self.scenario.safe_action(&self.world);
        let held: Vec<Button> = if a.turn > 0.0 { vec![Button::TurnLeft] } else { Vec::new() };
        let choices = self.encoding.from_buttons(&held);
        self.encoding.encode(&choices).expect("choices come from the encoding")
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        let choices = self.encoding.decode(action).ok_or(EnvError::InvalidAction { index: action, size: self.encoding.size() })?;
        self.step_choices(&choices)
    }

    /// Steps with one option index per action group.
    pub fn step_choices(&mut self, choices: &[usize]) -> Result<StepResult, EnvError> {
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        if self.encoding.encode(choices).is_none() {
            return Err(EnvError::InvalidChoices(choices.to_vec()));
        }
        let mut act = self.encoding.resolve(choices);
        if self.spec.scenario.kind == ScenarioKind::ArmamentBurden {
            // Pace is dictated by the load alone.
            act.speed = false;
        }

        let hard = self.spec.constraint.is_hard();
        let (mut reward, mut cost, mut terminated) = (0.0, 0.0, false);
        for _ in 0..FRAME_SKIP {
            let out = self.scenario.tick(&mut self.world, &act, &mut self.rng);
            reward += out.reward;
            cost += out.cost;
            if hard && cost > 0.0 {
                self.violation = true;
                terminated = true;
                break;
            }
            if out.done {
                terminated = true;
                break;
            }
        }
        self.steps += 1;
        self.reward_sum += reward;
        self.cost_sum += cost;
        self.record_visit();
        let truncated = !terminated && self.steps >= self.spec.max_steps;
        self.finished = terminated || truncated;
        Ok(StepResult { obs: self.observe(), reward, cost, terminated, truncated, info: self.info() })
    }

    fn record_visit(&mut self) {
        if let Some((x, y)) = self.world.agent_tile() {
            let i = self.world.grid.index(x, y);
            self.visits[i] += 1;
        }
    }

    pub fn observe(&self) -> Observation {
        match self.spec.obs {
            ObsMode::Features => Observation::Features(feature_observation(&self.scenario, &self.world, self.steps, self.spec.max_steps)),
            ObsMode::Pixels { width, height, channels } => {
                let mut f = self.render(width, height);
                if !channels.rgb {
                    f.rgb = Vec::new();
                }
                if !channels.depth {
                    f.depth = Vec::new();
                }
                if !channels.labels {
                    f.labels = Vec::new();
                }
                Observation::Pixels(f)
            }
        }
    }

    /// First-person view with the status strip.
    pub fn render(&self, width: usize, height: usize) -> FrameSet {
        let budget = self.spec.budget();
        let hud = HudBars {
            health: self.world.agent.health / self.world.agent.max_health,
            weight: self.scenario.load_fraction(&self.world),
            budget: if budget > 0.0 { self.cost_sum / budget } else { 0.0 },
        };
        let settings = RenderSettings { width, height, hud: true };
        raycast_render(&self.world, &self.world.agent.pose, &settings, Some(hud))
    }

    /// Digest of the simulation state, generator included.
    pub fn state_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.world.state_hash().to_le_bytes());
        h.update(self.rng.state().to_le_bytes());
        h.update(self.steps.to_le_bytes());
        h.update(self.reward_sum.to_bits().to_le_bytes());
        h.update(self.cost_sum.to_bits().to_le_bytes());
        h.finalize().into()
    }
}
