//! Merged run configuration: environment, trainer and command options
//! resolved from a `key=value` file plus command-line overrides.

use crate::CliError;
use hasard_core::env::{EnvSpec, SPEC_KEYS};
use hasard_play::{Pacing, TransportKind};
use hasard_rl::TrainConfig;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Train,
    Eval,
    Bench,
    Curriculum,
    Heatmap,
    Serve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Eval => "eval",
            Command::Bench => "bench",
            Command::Curriculum => "curriculum",
            Command::Heatmap => "heatmap",
            Command::Serve => "serve",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    Features,
    Pixels,
    Both,
}

impl BenchMode {
    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Features => "features",
            BenchMode::Pixels => "pixels",
            BenchMode::Both => "both",
        }
    }
}

impl FromStr for BenchMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "features" => Ok(BenchMode::Features),
            "pixels" => Ok(BenchMode::Pixels),
            "both" => Ok(BenchMode::Both),
            _ => Err(CliError::Config(format!("unknown bench mode `{s}` (expected features, pixels or both)"))),
        }
    }
}

/// Options owned by the commands rather than the environment or trainer.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub out: PathBuf,
    pub steps: u64,
    /// Seed sweep; empty means the single `seed`.
    pub seeds: Vec<u64>,
    pub parallel: bool,
    pub eval_episodes: usize,
    /// Env steps between progress lines on the log.
    pub report_every: u64,
    pub steps_per_level: u64,
    pub checkpoint: Option<PathBuf>,
    pub episodes: usize,
    pub mode: BenchMode,
    pub seconds: f64,
    pub bench_workers: Vec<usize>,
    /// Environments per worker in the benchmark.
    pub bench_envs: usize,
    /// Run directory read by `heatmap`; defaults to `out`.
    pub run_dir: Option<PathBuf>,
    pub window: usize,
    pub port: u16,
    pub record: Option<PathBuf>,
    pub pacing: Pacing,
    pub transport: TransportKind,
    /// Sessions to serve before exiting; 0 serves forever.
    pub sessions: u32,
    pub frame_width: usize,
    pub frame_height: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            steps: 1_000_000,
            seeds: Vec::new(),
            parallel: false,
            eval_episodes: 10,
            report_every: 100_000,
            steps_per_level: 1_000_000,
            checkpoint: None,
            episodes: 10,
            mode: BenchMode::Both,
            seconds: 5.0,
            bench_workers: vec![1],
            bench_envs: 8,
            run_dir: None,
            window: hasard_core::env::HEATMAP_EPISODES,
            port: 8723,
            record: None,
            pacing: Pacing::RealTime,
            transport: TransportKind::WebSocket,
            sessions: 0,
            frame_width: 128,
            frame_height: 72,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("bad value `{v}` for `{key}`")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| num(key, s)).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunOptions {
    /// Returns `Ok(false)` for keys owned by someone else.
    pub fn set(&mut self, key: &str, v: &str) -> Result<bool, CliError> {
        match key {
            "out" => self.out = PathBuf::from(v),
            "steps" => self.steps = num(key, v)?,
            "seeds" => self.seeds = list(key, v)?,
            "parallel" => self.parallel = num(key, v)?,
            "eval_episodes" => self.eval_episodes = num(key, v)?,
            "report_every" => self.report_every = num(key, v)?,
            "steps_per_level" => self.steps_per_level = num(key, v)?,
            "checkpoint" => self.checkpoint = Some(PathBuf::from(v)),
            "episodes" => self.episodes = num(key, v)?,
            "mode" => self.mode = v.parse()?,
            "seconds" => {
                self.seconds = num(key, v)?;
                if !(self.seconds >= 0.0 && self.seconds.is_finite()) {
                    return Err(CliError::Config(format!("seconds must be a non-negative number, got {v}")));
                }
            }
            "bench_workers" => self.bench_workers = list(key, v)?,
            "bench_envs" => self.bench_envs = num(key, v)?,
            "run_dir" => self.run_dir = Some(PathBuf::from(v)),
            "window" => self.window = num(key, v)?,
            "port" => self.port = num(key, v)?,
            "record" => self.record = Some(PathBuf::from(v)),
            "pacing" => {
                self.pacing = match v {
                    "realtime" => Pacing::RealTime,
                    "lockstep" => Pacing::Lockstep,
                    _ => return Err(CliError::Config(format!("unknown pacing `{v}` (expected realtime or lockstep)"))),
                }
            }
            "transport" => {
                self.transport = match v {
                    "ws" => TransportKind::WebSocket,
                    "tcp" => TransportKind::Tcp,
                    _ => return Err(CliError::Config(format!("unknown transport `{v}` (expected ws or tcp)"))),
                }
            }
            "sessions" => self.sessions = num(key, v)?,
            "frame_width" => self.frame_width = num(key, v)?,
            "frame_height" => self.frame_height = num(key, v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k}={v}\n"));
        put("out", self.out.display().to_string());
        put("steps", self.steps.to_string());
        if !self.seeds.is_empty() {
            put("seeds", join(&self.seeds));
        }
        put("parallel", self.parallel.to_string());
        put("eval_episodes", self.eval_episodes.to_string());
        put("report_every", self.report_every.to_string());
        put("steps_per_level", self.steps_per_level.to_string());
        if let Some(c) = &self.checkpoint {
            put("checkpoint", c.display().to_string());
        }
        put("episodes", self.episodes.to_string());
        put("mode", self.mode.name().to_string());
        put("seconds", self.seconds.to_string());
        put("bench_workers", join(&self.bench_workers));
        put("bench_envs", self.bench_envs.to_string());
        if let Some(r) = &self.run_dir {
            put("run_dir", r.display().to_string());
        }
        put("window", self.window.to_string());
        put("port", self.port.to_string());
        if let Some(r) = &self.record {
            put("record", r.display().to_string());
        }
        put("pacing", if self.pacing == Pacing::RealTime { "realtime" } else { "lockstep" }.to_string());
        put("transport", if self.transport == TransportKind::WebSocket { "ws" } else { "tcp" }.to_string());
        put("sessions", self.sessions.to_string());
        put("frame_width", self.frame_width.to_string());
        put("frame_height", self.frame_height.to_string());
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Absent only for commands that never build an environment.
    pub env: Option<EnvSpec>,
    pub train: TrainConfig,
    pub run: RunOptions,
}

/// Splits `key=value` tokens separated by whitespace or newlines; `#`
/// starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| CliError::Config(format!("expected key=value, got `{tok}`")))?;
            out.push((k.to_string(), v.to_string()));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_pairs(&text)
}

impl RunConfig {
    /// Applies `pairs` in order; later keys win. `env` names the scenario,
    /// `seed` seeds both the environment and the trainer.
    pub fn resolve(command: Command, pairs: &[(String, String)]) -> Result<Self, CliError> {
        let mut env_pairs: Vec<(String, String)> = Vec::new();
        let mut train = TrainConfig::default();
        let mut run = RunOptions::default();
        for (k, v) in pairs {
            match k.as_str() {
                "command" => {}
                "env" => env_pairs.push(("scenario".into(), v.clone())),
                "seed" => {
                    env_pairs.push(("seed".into(), v.clone()));
                    train.set("train_seed", v).map_err(|e| CliError::Config(e.to_string()))?;
                }
                key if SPEC_KEYS.contains(&key) => env_pairs.push((k.clone(), v.clone())),
                key => {
                    let owned = train.set(key, v).map_err(|e| match e {
                        hasard_rl::TrainError::Config(m) => CliError::Config(m),
                        other => CliError::Config(other.to_string()),
                    })?;
                    if !owned && !run.set(key, v)? {
                        return Err(CliError::Config(format!("unknown key `{key}`")));
                    }
                }
            }
        }
        train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let has_scenario = env_pairs.iter().any(|(k, _)| k == "scenario");
        let env = if has_scenario {
            let text: Vec<String> = env_pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
            Some(EnvSpec::parse_kv(&text.join("\n"))?)
        } else if env_pairs.is_empty() {
            None
        } else {
            return Err(CliError::Config("environment options given without `env`".into()));
        };
        Ok(Self { command, env, train, run })
    }

    pub fn env(&self) -> Result<&EnvSpec, CliError> {
        self.env.as_ref().ok_or_else(|| CliError::Config(format!("`{}` needs --env", self.command.name())))
    }

    /// Resolved config in a form `resolve` accepts back unchanged.
    pub fn echo(&self) -> String {
        let mut s = format!("command={}\n", self.command.name());
        if let Some(env) = &self.env {
            s.push_str(&env.to_kv());
        }
        s.push_str(&self.train.to_kv());
        s.push_str(&self.run.to_kv());
        s
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.echo())
    }
}
