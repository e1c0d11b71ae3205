//! Raw environment throughput with uniformly random actions.

use crate::config::BenchMode;
use crate::CliError;
use hasard_core::env::{Channels, EnvSpec, ObsMode, VecEnv};
use hasard_core::rng::{derive_seed, Rng};
use std::time::{Duration, Instant};

pub const BENCH_HEADER: &str = "mode,workers,steps,seconds,steps_per_sec";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub mode: &'static str,
    pub workers: usize,
    pub steps: u64,
    pub seconds: f64,
}

impl BenchRow {
    pub fn steps_per_sec(&self) -> f64 {
        if self.seconds > 0.0 {
            self.steps as f64 / self.seconds
        } else {
            0.0
        }
    }

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{:.3},{:.1}", self.mode, self.workers, self.steps, self.seconds, self.steps_per_sec())
    }
}

/// Copy of `spec` with pixel observations forced on (or left as is).
pub fn pixel_spec(spec: &EnvSpec, width: usize, height: usize) -> EnvSpec {
    let mut s = spec.clone();
    if s.obs == ObsMode::Features {
        s.obs = ObsMode::Pixels { width, height, channels: Channels::RGB };
    }
    s
}

/// Steps `envs_per_worker * workers` environments with auto-reset until
/// `seconds` have elapsed; `seconds == 0` takes no steps.
pub fn measure(spec: &EnvSpec, workers: usize, envs_per_worker: usize, seconds: f64) -> Result<BenchRow, CliError> {
    let workers = workers.max(1);
    let n = (workers * envs_per_worker).max(1);
    let mode = match spec.obs {
        ObsMode::Features => "features",
        ObsMode::Pixels { .. } => "pixels",
    };
    let (mut envs, _) = VecEnv::new(spec, n, workers, true)?;
    let size = envs.action_size() as u64;
    let mut rng = Rng::new(derive_seed(spec.seed, 0x6265_6e63));
    let budget = Duration::from_secs_f64(seconds);
    let start = Instant::now();
    let mut steps = 0u64;
    let mut actions = vec![0usize; n];
    while start.elapsed() < budget {
        for a in actions.iter_mut() {
            *a = rng.below(size) as usize;
        }
        for s in envs.step(&actions) {
            s.result?;
        }
        steps += n as u64;
    }
    Ok(BenchRow { mode, workers, steps, seconds: start.elapsed().as_secs_f64() })
}

pub fn run(spec: &EnvSpec, mode: BenchMode, workers: &[usize], envs_per_worker: usize, seconds: f64, frame: (usize, usize)) -> Result<Vec<BenchRow>, CliError> {
    let mut specs = Vec::new();
    if matches!(mode, BenchMode::Features | BenchMode::Both) {
        let mut s = spec.clone();
        s.obs = ObsMode::Features;
        specs.push(s);
    }
    if matches!(mode, BenchMode::Pixels | BenchMode::Both) {
        specs.push(pixel_spec(spec, frame.0, frame.1));
    }
    let mut rows = Vec::new();
    for s in &specs {
        for &w in workers {
            rows.push(measure(s, w, envs_per_worker, seconds)?);
        }
    }
    Ok(rows)
}
