//! The subcommands. Each writes its artifacts under `run.out` and its
//! human-readable summary to `stdout`.

use crate::bench;
use crate::config::{Command, RunConfig};
use crate::visits::VisitLog;
use crate::CliError;
use hasard_core::env::{EnvSpec, HEATMAP_EPISODES};
use hasard_core::scenarios::ScenarioId;
use hasard_play::{serve_one, ServeConfig};
use hasard_rl::checkpoint::{self, params_hash};
use hasard_rl::{evaluate_policy, EvalSummary, TrainConfig, Trainer, LOG_HEADER};
use rayon::prelude::*;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

pub const CONFIG_ECHO: &str = "config.echo";
pub const LOG_FILE: &str = "log.csv";
pub const CHECKPOINT_FILE: &str = "ckpt.bin";
pub const VISITS_FILE: &str = "visits.txt";
pub const HEATMAP_FILE: &str = "heatmap.pgm";
pub const EVAL_FILE: &str = "eval.csv";
pub const TRANSITIONS_FILE: &str = "transitions.csv";
pub const BENCH_FILE: &str = "bench.csv";

/// Echoes the resolved config to `out/config.echo`, then runs the command.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    create_dir(&cfg.run.out)?;
    write_file(&cfg.run.out.join(CONFIG_ECHO), cfg.echo())?;
    log::debug!("resolved config:\n{}", cfg.echo());
    match cfg.command {
        Command::Train => train(cfg, stdout),
        Command::Eval => eval(cfg, stdout),
        Command::Bench => run_bench(cfg, stdout),
        Command::Curriculum => curriculum(cfg, stdout),
        Command::Heatmap => heatmap(cfg, stdout),
        Command::Serve => serve(cfg, stdout),
    }
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn say(stdout: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(stdout, "{line}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Appends CSV lines as they arrive so a killed run keeps its log.
struct CsvSink {
    path: PathBuf,
    w: BufWriter<File>,
    err: Option<std::io::Error>,
}

impl CsvSink {
    fn create(path: PathBuf, header: &str) -> Result<Self, CliError> {
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut sink = Self { path, w: BufWriter::new(f), err: None };
        sink.line(header);
        Ok(sink)
    }

    fn line(&mut self, s: &str) {
        if self.err.is_none() {
            if let Err(e) = writeln!(self.w, "{s}").and_then(|_| self.w.flush()) {
                self.err = Some(e);
            }
        }
    }

    fn finish(mut self) -> Result<(), CliError> {
        match self.err.take() {
            Some(e) => Err(CliError::io(&self.path, e)),
            None => Ok(()),
        }
    }
}

fn eval_csv(s: &EvalSummary) -> String {
    let mut out = String::from("episode,return,cost\n");
    for (i, e) in s.episodes.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", e.ret, e.cost));
    }
    out
}

pub fn summary_line(s: &EvalSummary) -> String {
    format!(
        "episodes={} mean_return={:.4} std_return={:.4} mean_cost={:.4} std_cost={:.4} budget={} satisfied={}",
        s.episodes.len(),
        s.mean_return,
        s.std_return,
        s.mean_cost,
        s.std_cost,
        s.budget,
        s.satisfied
    )
}

/// Result of one training seed.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub seed: u64,
    pub dir: PathBuf,
    pub steps: u64,
    pub final_return: f64,
    pub final_cost: f64,
    pub eval: Option<EvalSummary>,
}

/// Trains one seed into `dir`: config echo, streamed log, checkpoint,
/// visit log, heatmap and optional greedy evaluation.
pub fn train_seed(cfg: &RunConfig, seed: u64, dir: &Path) -> Result<TrainOutcome, CliError> {
    let mut spec = cfg.env()?.clone();
    spec.seed = seed;
    let mut tcfg = cfg.train.clone();
    tcfg.seed = seed;
    create_dir(dir)?;
    let echo = RunConfig { env: Some(spec.clone()), train: tcfg.clone(), ..cfg.clone() };
    write_file(&dir.join(CONFIG_ECHO), echo.echo())?;

    let mut trainer = Trainer::new(&spec, tcfg)?;
    trainer.track_heatmap(HEATMAP_EPISODES);
    let mut sink = CsvSink::create(dir.join(LOG_FILE), LOG_HEADER)?;
    let report = cfg.run.report_every.max(1);
    let mut next_report = report;
    let log = trainer.run(cfg.run.steps, |row| {
        sink.line(&row.to_csv());
        if row.step >= next_report {
            log::info!("seed {seed} step {} return {:.2} cost {:.2} lambda {:.3}", row.step, row.ret, row.cost, row.lambda);
            next_report = row.step - row.step % report + report;
        }
    })?;
    sink.finish()?;
    checkpoint::save(&dir.join(CHECKPOINT_FILE), &trainer.state())?;

    let env0 = &trainer.envs().envs()[0];
    if let Some(h) = trainer.envs().heatmap() {
        let visits = VisitLog::from_heatmap(env0, h);
        write_file(&dir.join(VISITS_FILE), visits.to_text())?;
        write_file(&dir.join(HEATMAP_FILE), visits.to_pgm(&visits.aggregate(HEATMAP_EPISODES)))?;
    }

    let eval = if cfg.run.eval_episodes > 0 {
        let s = evaluate_policy(trainer.policy(), &spec, cfg.run.eval_episodes)?;
        write_file(&dir.join(EVAL_FILE), eval_csv(&s))?;
        Some(s)
    } else {
        None
    };
    let last = log.rows.last();
    Ok(TrainOutcome {
        seed,
        dir: dir.to_path_buf(),
        steps: trainer.steps(),
        final_return: last.map_or(f64::NAN, |r| r.ret),
        final_cost: last.map_or(f64::NAN, |r| r.cost),
        eval,
    })
}

fn train(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    cfg.env()?;
    let sweep = !cfg.run.seeds.is_empty();
    let seeds = if sweep { cfg.run.seeds.clone() } else { vec![cfg.train.seed] };
    let dir_for = |s: u64| if sweep { cfg.run.out.join(format!("seed_{s}")) } else { cfg.run.out.clone() };
    let outcomes: Vec<Result<TrainOutcome, CliError>> = if cfg.run.parallel {
        seeds.par_iter().map(|&s| train_seed(cfg, s, &dir_for(s))).collect()
    } else {
        seeds.iter().map(|&s| train_seed(cfg, s, &dir_for(s))).collect()
    };
    for o in outcomes {
        let o = o?;
        let mut line = format!(
            "seed={} steps={} rolling_return={:.4} rolling_cost={:.4} dir={}",
            o.seed,
            o.steps,
            o.final_return,
            o.final_cost,
            o.dir.display()
        );
        if let Some(e) = &o.eval {
            line.push(' ');
            line.push_str(&summary_line(e));
        }
        say(stdout, &line)?;
    }
    Ok(())
}

fn eval(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = cfg.env()?;
    let path = cfg.run.checkpoint.clone().unwrap_or_else(|| cfg.run.out.join(CHECKPOINT_FILE));
    let state = checkpoint::load(&path)?;
    let summary = evaluate_policy(&state.policy, spec, cfg.run.episodes)?;
    create_dir(&cfg.run.out)?;
    write_file(&cfg.run.out.join(EVAL_FILE), eval_csv(&summary))?;
    say(stdout, &summary_line(&summary))
}

fn run_bench(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = cfg.env()?;
    let r = &cfg.run;
    let rows = bench::run(spec, r.mode, &r.bench_workers, r.bench_envs, r.seconds, (r.frame_width, r.frame_height))?;
    let mut text = format!("{}\n", bench::BENCH_HEADER);
    for row in &rows {
        text.push_str(&row.to_csv());
        text.push('\n');
    }
    create_dir(&r.out)?;
    write_file(&r.out.join(BENCH_FILE), &text)?;
    write!(stdout, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

pub const TRANSITIONS_HEADER: &str = "from_level,to_level,step,end_params_sha256,start_params_sha256";

/// Levels 1 to 3 in order, each for `steps_per_level` steps, carrying the
/// policy parameters across each boundary.
fn curriculum(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let base = cfg.env()?;
    let out = &cfg.run.out;
    let mut log = CsvSink::create(out.join(LOG_FILE), &format!("level,{LOG_HEADER}"))?;
    let mut transitions = CsvSink::create(out.join(TRANSITIONS_FILE), TRANSITIONS_HEADER)?;
    let mut carried: Option<(u8, [u8; 32], hasard_rl::Policy<f32>)> = None;
    let mut offset = 0u64;
    let mut last = None;
    for level in 1..=3u8 {
        let mut spec: EnvSpec = base.clone();
        spec.scenario = ScenarioId::new(base.scenario.kind, level).map_err(|e| CliError::Config(e.to_string()))?;
        let tcfg: TrainConfig = cfg.train.clone();
        let mut trainer = Trainer::new(&spec, tcfg)?;
        if let Some((from, end_hash, policy)) = carried.take() {
            trainer.set_policy(policy)?;
            let start_hash = params_hash(trainer.policy());
            transitions.line(&format!("{from},{level},{offset},{},{}", hex(&end_hash), hex(&start_hash)));
        }
        trainer.run(cfg.run.steps_per_level, |row| {
            let mut row = row.clone();
            row.step += offset;
            log.line(&format!("{level},{}", row.to_csv()));
        })?;
        offset += trainer.steps();
        log::info!("level {level} done at step {offset}");
        carried = Some((level, params_hash(trainer.policy()), trainer.policy().clone()));
        last = Some((spec, trainer));
    }
    log.finish()?;
    transitions.finish()?;
    let (spec, mut trainer) = last.expect("three levels ran");
    checkpoint::save(&out.join(CHECKPOINT_FILE), &trainer.state())?;
    let summary = evaluate_policy(trainer.policy(), &spec, cfg.run.eval_episodes)?;
    write_file(&out.join(EVAL_FILE), eval_csv(&summary))?;
    say(stdout, &format!("steps={offset} level=3 {}", summary_line(&summary)))
}

fn heatmap(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let run_dir = cfg.run.run_dir.clone().unwrap_or_else(|| cfg.run.out.clone());
    let path = run_dir.join(VISITS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let visits = VisitLog::parse(&text)?;
    if visits.episodes.is_empty() {
        return Err(CliError::NoData(format!("{} has no finished episodes", path.display())));
    }
    let window = cfg.run.window;
    if window > visits.episodes.len() {
        log::warn!("window {window} exceeds the {} recorded episodes; using all of them", visits.episodes.len());
    }
    let used = window.min(visits.episodes.len());
    let counts = visits.aggregate(window);
    create_dir(&cfg.run.out)?;
    let out = cfg.run.out.join(HEATMAP_FILE);
    write_file(&out, visits.to_pgm(&counts))?;
    say(stdout, &format!("episodes={used} width={} height={} out={}", visits.width, visits.height, out.display()))
}

fn serve(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = cfg.env()?;
    let r = &cfg.run;
    let addr = ("127.0.0.1", r.port);
    let listener = TcpListener::bind(addr).map_err(|e| CliError::io(Path::new(&format!("127.0.0.1:{}", r.port)), e))?;
    log::info!("listening on {}", listener.local_addr().map_err(|e| CliError::io(Path::new("listener"), e))?);
    let mut session = 0u32;
    while r.sessions == 0 || session < r.sessions {
        let mut sc = ServeConfig::new(spec.clone());
        sc.width = r.frame_width;
        sc.height = r.frame_height;
        sc.pacing = r.pacing;
        sc.record_dir = r.record.clone();
        sc.session = session;
        let summary = serve_one(&listener, sc, r.transport)?;
        let (mr, mc) = summary.means().unwrap_or((f64::NAN, f64::NAN));
        say(
            stdout,
            &format!(
                "session={session} episodes={} mean_return={mr:.4} mean_cost={mc:.4} aborted={} recordings={}",
                summary.episodes.len(),
                summary.aborted,
                summary.recordings.len()
            ),
        )?;
        session += 1;
    }
    Ok(())
}
