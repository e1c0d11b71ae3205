use clap::{Args, Parser, Subcommand};
use hasard_cli::commands;
use hasard_cli::config::{read_config_file, Command, RunConfig};
use hasard_cli::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hasard", version, about = "Safe-RL scenarios: train, evaluate, benchmark and play")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one or more seeds.
    Train(Opts),
    /// Greedy evaluation of a checkpoint.
    Eval(Opts),
    /// Environment throughput with random actions.
    Bench(Opts),
    /// Train through levels 1 to 3, carrying the policy.
    Curriculum(Opts),
    /// Render the visit heatmap of a finished run.
    Heatmap(Opts),
    /// Serve the environment to human players.
    Serve(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario, e.g. remedy_rush-2.
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated seed sweep.
    #[arg(long)]
    seeds: Option<String>,
    /// Train the sweep's seeds concurrently.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    /// features, pixels or both.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seconds: Option<f64>,
    /// Comma-separated worker counts to benchmark.
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    port: Option<u16>,
    /// Directory for episode recordings.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Episodes aggregated into the heatmap.
    #[arg(long)]
    window: Option<usize>,
    /// Run directory holding visits.txt.
    #[arg(long)]
    run: Option<PathBuf>,
    #[arg(long)]
    steps_per_level: Option<u64>,
    #[arg(long)]
    budget: Option<f64>,
    /// Map size, e.g. 12x12.
    #[arg(long)]
    map: Option<String>,
    /// realtime or lockstep.
    #[arg(long)]
    pacing: Option<String>,
    /// ws or tcp.
    #[arg(long)]
    transport: Option<String>,
    /// Sessions to serve before exiting (0 = forever).
    #[arg(long)]
    sessions: Option<u32>,
    /// Any config key, repeatable: --set lr=0.0003
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Opts {
    fn pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut pairs = match &self.config {
            Some(p) => read_config_file(p)?,
            None => Vec::new(),
        };
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        let s = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string());
        put("env", self.env.clone());
        put("method", self.method.clone());
        put("steps", self.steps.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("seeds", self.seeds.clone());
        put("parallel", self.parallel.then(|| "true".to_string()));
        put("out", s(&self.out));
        put("checkpoint", s(&self.checkpoint));
        put("episodes", self.episodes.map(|v| v.to_string()));
        put("mode", self.mode.clone());
        put("seconds", self.seconds.map(|v| v.to_string()));
        put("bench_workers", self.workers.clone());
        put("port", self.port.map(|v| v.to_string()));
        put("record", s(&self.record));
        put("window", self.window.map(|v| v.to_string()));
        put("run_dir", s(&self.run));
        put("steps_per_level", self.steps_per_level.map(|v| v.to_string()));
        put("budget", self.budget.map(|v| v.to_string()));
        put("map", self.map.clone());
        put("pacing", self.pacing.clone());
        put("transport", self.transport.clone());
        put("sessions", self.sessions.map(|v| v.to_string()));
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            pairs.push((k.to_string(), v.to_string()));
        }
        Ok(pairs)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (command, opts) = match cli.cmd {
        Cmd::Train(o) => (Command::Train, o),
        Cmd::Eval(o) => (Command::Eval, o),
        Cmd::Bench(o) => (Command::Bench, o),
        Cmd::Curriculum(o) => (Command::Curriculum, o),
        Cmd::Heatmap(o) => (Command::Heatmap, o),
        Cmd::Serve(o) => (Command::Serve, o),
    };
    let result = opts
        .pairs()
        .and_then(|p| RunConfig::resolve(command, &p))
        .and_then(|cfg| commands::run(&cfg, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
