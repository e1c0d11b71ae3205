use hasard_cli::commands::{self, CHECKPOINT_FILE, EVAL_FILE, HEATMAP_FILE, LOG_FILE, TRANSITIONS_FILE, VISITS_FILE};
use hasard_cli::config::{parse_pairs, Command, RunConfig};
use hasard_cli::visits::VisitLog;
use hasard_core::env::{Env, EnvSpec, Heatmap};
use hasard_rl::checkpoint;
use std::fs;
use std::path::Path;
use std::process::Command as Proc;

const TINY: &str = "num_envs=4 rollout=16 hidden=16 eval_episodes=2 max_steps=40 map=12x12";

fn cfg(command: Command, text: &str) -> RunConfig {
    RunConfig::resolve(command, &parse_pairs(text).unwrap()).unwrap()
}

fn run(command: Command, text: &str) -> String {
    let mut out = Vec::new();
    commands::run(&cfg(command, text), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

fn out_arg(dir: &Path) -> String {
    format!("out={}", dir.display())
}

#[test]
fn smoke_train_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let text = run(Command::Train, &format!("env=remedy_rush-1 method=ppolag steps=640 seed=3 {TINY} {}", out_arg(dir.path())));
    assert!(text.starts_with("seed=3 steps=640"), "{text}");
    let log = fs::read_to_string(dir.path().join(LOG_FILE)).unwrap();
    assert!(log.lines().count() >= 2);
    assert!(log.starts_with("step,return,cost,lambda"));
    checkpoint::load(&dir.path().join(CHECKPOINT_FILE)).unwrap();
    let echo = fs::read_to_string(dir.path().join("config.echo")).unwrap();
    assert_eq!(RunConfig::resolve(Command::Train, &parse_pairs(&echo).unwrap()).unwrap().train.seed, 3);
    assert_eq!(fs::read_to_string(dir.path().join(EVAL_FILE)).unwrap().lines().count(), 3);
    let visits = VisitLog::parse(&fs::read_to_string(dir.path().join(VISITS_FILE)).unwrap()).unwrap();
    assert_eq!(visits.episodes.len(), 640 / 40);
    let pgm = fs::read(dir.path().join(HEATMAP_FILE)).unwrap();
    // 12x12 interior plus the border wall.
    assert!(pgm.starts_with(b"P5\n14 14\n255\n"));
    assert_eq!(pgm.len(), 13 + 14 * 14);
}

#[test]
fn same_seed_same_log() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        run(Command::Train, &format!("env=armament_burden-1 method=ppo steps=512 seed=9 {TINY} {}", out_arg(d.path())));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join(LOG_FILE)).unwrap();
    assert_eq!(read(&a), read(&b));
    let ck = |d: &tempfile::TempDir| fs::read(d.path().join(CHECKPOINT_FILE)).unwrap();
    assert_eq!(ck(&a), ck(&b));
}

#[test]
fn rerun_from_echo_reproduces_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(Command::Train, &format!("env=detonators_dilemma-1 method=ppopid steps=256 seed=2 {TINY} {}", out_arg(a.path())));
    let echo = fs::read_to_string(a.path().join("config.echo")).unwrap();
    run(Command::Train, &format!("{echo}\n{}", out_arg(b.path())));
    for f in [LOG_FILE, CHECKPOINT_FILE, EVAL_FILE, VISITS_FILE, HEATMAP_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_sweep_gets_one_directory_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let text = run(
        Command::Train,
        &format!("env=remedy_rush-1 method=ppo steps=64 seeds=1,2 parallel=true eval_episodes=0 {TINY} {}", out_arg(dir.path())),
    );
    assert_eq!(text.lines().count(), 2);
    for s in [1, 2] {
        assert!(dir.path().join(format!("seed_{s}")).join(CHECKPOINT_FILE).exists());
    }
}

#[test]
fn noop_checkpoint_in_collateral_scores_nothing() {
    // A policy whose every logit is zero except a large NO-OP bias picks
    // choice 0 in every group under greedy evaluation.
    let dir = tempfile::tempdir().unwrap();
    run(Command::Train, &format!("env=collateral_damage-1 method=ppo steps=64 eval_episodes=0 {TINY} {}", out_arg(dir.path())));
    let path = dir.path().join(CHECKPOINT_FILE);
    let mut state = checkpoint::load(&path).unwrap();
    let policy = &mut state.policy;
    let sizes = policy.net.sizes().to_vec();
    let groups = policy.groups().to_vec();
    let n_layers = sizes.len() - 1;
    let mut offset = 0;
    for l in 0..n_layers {
        let (i, o) = (sizes[l], sizes[l + 1]);
        let w = i * o;
        if l + 1 == n_layers {
            policy.net.params[offset..offset + w].iter_mut().for_each(|p| *p = 0.0);
            let bias = &mut policy.net.params[offset + w..offset + w + o];
            bias.iter_mut().for_each(|b| *b = 0.0);
            let mut start = 0;
            for &g in &groups {
                bias[start] = 10.0;
                start += g;
            }
        }
        offset += w + o;
    }
    checkpoint::save(&path, &state).unwrap();
    let text = run(
        Command::Eval,
        &format!("env=collateral_damage-1 max_steps=200 episodes=3 checkpoint={} {}", path.display(), out_arg(dir.path())),
    );
    assert!(text.contains("mean_return=0.0000") && text.contains("mean_cost=0.0000"), "{text}");
}

#[test]
fn bench_with_zero_seconds_takes_no_steps() {
    let dir = tempfile::tempdir().unwrap();
    let text = run(Command::Bench, &format!("env=remedy_rush-1 seconds=0 mode=both bench_workers=1,2 {}", out_arg(dir.path())));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mode,workers,steps,seconds,steps_per_sec");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(2) == Some("0")), "{text}");
    assert!(lines[3].starts_with("pixels,1"));
}

#[test]
fn curriculum_carries_parameters_across_levels() {
    let dir = tempfile::tempdir().unwrap();
    let text = run(
        Command::Curriculum,
        &format!("env=volcanic_venture method=ppolag steps_per_level=128 {TINY} {}", out_arg(dir.path())),
    );
    assert!(text.starts_with("steps=384 level=3"), "{text}");
    let t = fs::read_to_string(dir.path().join(TRANSITIONS_FILE)).unwrap();
    let rows: Vec<Vec<&str>> = t.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[0][1], rows[0][2]), ("1", "2", "128"));
    assert_eq!((rows[1][0], rows[1][1], rows[1][2]), ("2", "3", "256"));
    for r in &rows {
        assert_eq!(r[3], r[4]);
        assert_eq!(r[3].len(), 64);
    }
    assert_ne!(rows[0][3], rows[1][3]);
    let log = fs::read_to_string(dir.path().join(LOG_FILE)).unwrap();
    let levels: Vec<&str> = log.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert!(levels.contains(&"1") && levels.contains(&"3"));
}

#[test]
fn heatmap_of_a_stationary_agent_lights_one_tile() {
    let spec = EnvSpec::parse_kv("scenario=remedy_rush-1 map=12x12 max_steps=30 seed=4").unwrap();
    let (mut env, _) = Env::new(spec).unwrap();
    let (w, h) = env.grid_size();
    let mut h = Heatmap::with_capacity(w, h, 10);
    loop {
        // Action 0 is NO-OP: the agent never leaves its start tile.
        let r = env.step(0).unwrap();
        if r.done() {
            break;
        }
    }
    h.push_episode(env.visits().to_vec());
    let log = VisitLog::from_heatmap(&env, &h);
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(VISITS_FILE), log.to_text()).unwrap();
    run(Command::Heatmap, &format!("run_dir={} {}", dir.path().display(), out_arg(dir.path())));
    let pgm = fs::read(dir.path().join(HEATMAP_FILE)).unwrap();
    let px = &pgm[pgm.len() - env.visits().len()..];
    assert_eq!(px.iter().filter(|&&p| p == 254).count(), 1);
    assert!(px.iter().all(|&p| p == 0 || p == 254 || p == 255));
    let hot = px.iter().position(|&p| p == 254).unwrap();
    // The start tile counts once at reset, then once per step.
    assert_eq!(env.visits()[hot], 31);
}

#[test]
fn heatmap_without_episodes_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(VISITS_FILE), "HASARD-VISITS 1\nsize 1 1\n.\n").unwrap();
    let c = cfg(Command::Heatmap, &format!("run_dir={} {}", dir.path().display(), out_arg(dir.path())));
    let err = commands::run(&c, &mut Vec::new()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

fn bin(args: &[&str]) -> std::process::Output {
    Proc::new(env!("CARGO_BIN_EXE_hasard")).args(args).env("RUST_LOG", "error").output().unwrap()
}

#[test]
fn unknown_method_exits_with_two_and_lists_the_choices() {
    let out = bin(&["train", "--env", "remedy_rush-1", "--method", "sac", "--steps", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for m in ["ppo", "ppocost", "ppolag", "ppopid"] {
        assert!(err.contains(m), "{err}");
    }
}

#[test]
fn binary_trains_and_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display().to_string();
    let out = bin(&[
        "train", "--env", "armament_burden-1", "--steps", "128", "--out", &d, "--set", "num_envs=4", "--set", "rollout=16", "--set",
        "max_steps=32", "--set", "eval_episodes=0",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin(&["eval", "--env", "armament_burden-1", "--episodes", "2", "--out", &d, "--set", "max_steps=32"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("episodes=2 mean_return="));
    // The checkpoint does not fit pixel observations.
    let out = bin(&["eval", "--env", "armament_burden-1", "--out", &d, "--set", "obs=pixels"]);
    assert_eq!(out.status.code(), Some(2));
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn config_echo_resolves_to_itself(steps in 1u64..10_000_000, seed in any::<u64>(), lr in 1e-6f64..1.0, level in 1u8..=3, window in 1usize..5000) {
            let text = format!("env=precipice_plunge-{level} steps={steps} seed={seed} lr={lr} window={window}");
            let a = cfg(Command::Train, &text);
            let b = RunConfig::resolve(Command::Train, &parse_pairs(&a.echo()).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn visit_log_text_round_trips(w in 1usize..8, h in 1usize..8, eps in 0usize..6, seed in any::<u64>()) {
            let mut rng = hasard_core::rng::Rng::new(seed);
            let log = VisitLog {
                width: w,
                height: h,
                walls: (0..w * h).map(|_| rng.chance(0.3)).collect(),
                episodes: (0..eps).map(|_| (0..w * h).map(|_| rng.below(1000) as u32).collect()).collect(),
            };
            prop_assert_eq!(VisitLog::parse(&log.to_text()).unwrap(), log.clone());
            let pgm = log.to_pgm(&log.aggregate(3));
            prop_assert_eq!(pgm.len(), format!("P5\n{w} {h}\n255\n").len() + w * h);
        }
    }
}
