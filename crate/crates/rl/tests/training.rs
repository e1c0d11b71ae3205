use hasard_core::env::EnvSpec;
use hasard_core::rng::Rng;
use hasard_rl::checkpoint::{from_bytes, params_hash, to_bytes};
use hasard_rl::{
    compute_gae, evaluate_policy, lagrange_update, pid_update, train, EpisodeTotals, EvalSummary, LagrangeState, Method, PidState,
    Policy, TrainConfig, TrainError, Trainer,
};
use proptest::prelude::*;

fn tiny(method: Method, seed: u64) -> TrainConfig {
    TrainConfig { method, seed, num_envs: 4, rollout: 8, hidden: vec![16], ..TrainConfig::default() }
}

fn toy_spec() -> EnvSpec {
    "scenario=remedy_rush-1 map=12x12 budget=5 max_steps=60 seed=5".parse().unwrap()
}

/// Lambda-return form of the advantage, summed term by term.
fn brute_gae(r: &[f64], v: &[f64], d: &[bool], gamma: f64, lambda: f64) -> Vec<f64> {
    let n = r.len();
    (0..n)
        .map(|t| {
            let end = (t..n).find(|&j| d[j]).unwrap_or(n - 1);
            let k_max = end - t + 1;
            let n_step = |k: usize| {
                let mut g = 0.0;
                for i in 0..k {
                    g += gamma.powi(i as i32) * r[t + i];
                }
                if !d[t + k - 1] {
                    g += gamma.powi(k as i32) * v[t + k];
                }
                g
            };
            let mut lret = lambda.powi(k_max as i32 - 1) * n_step(k_max);
            for k in 1..k_max {
                lret += (1.0 - lambda) * lambda.powi(k as i32 - 1) * n_step(k);
            }
            lret - v[t]
        })
        .collect()
}

#[test]
fn gae_matches_brute_force_sums() {
    let mut rng = Rng::new(17);
    let mut pairs = vec![(0.0, 0.0), (1.0, 1.0), (0.99, 0.95), (1.0, 0.0), (0.0, 1.0)];
    pairs.extend((0..20).map(|_| (rng.range(0.0, 1.0), rng.range(0.0, 1.0))));
    for n in 1..=6 {
        for &(gamma, lambda) in &pairs {
            for _ in 0..40 {
                let r: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
                let v: Vec<f64> = (0..=n).map(|_| rng.range(-2.0, 2.0)).collect();
                let d: Vec<bool> = (0..n).map(|_| rng.index(3) == 0).collect();
                let (adv, ret) = compute_gae(&r, &v, &d, gamma, lambda);
                let oracle = brute_gae(&r, &v, &d, gamma, lambda);
                for t in 0..n {
                    assert!((adv[t] - oracle[t]).abs() < 1e-12, "n={n} g={gamma} l={lambda} t={t}: {} vs {}", adv[t], oracle[t]);
                    assert!((ret[t] - (oracle[t] + v[t])).abs() < 1e-12);
                }
            }
        }
    }
    assert!(compute_gae(&[], &[0.5], &[], 0.9, 0.9).0.is_empty());
}

#[test]
fn lagrange_matches_reflected_partial_sums() {
    // Dyadic rate and integer costs keep every operation exact.
    let rate = 1.0 / 64.0;
    let budget = 5.0;
    let mut rng = Rng::new(2);
    for _ in 0..200 {
        let stream: Vec<f64> = (0..50).map(|_| rng.index(12) as f64).collect();
        let mut state = LagrangeState { lambda: 0.0 };
        let (mut sum, mut low) = (0.0f64, 0.0f64);
        for &j in &stream {
            state = lagrange_update(state, j, budget, rate);
            sum += j - budget;
            low = low.min(sum);
            assert_eq!(state.lambda, rate * (sum - low));
        }
    }
}

#[test]
fn lagrange_closed_form_without_projection() {
    let mut state = LagrangeState { lambda: 0.0 };
    let mut total = 0.0;
    for k in 0..100 {
        let j = 5.0 + (k % 7) as f64;
        state = lagrange_update(state, j, 5.0, 0.01);
        total += j - 5.0;
        assert!((state.lambda - 0.01 * total).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn pid_integral_never_negative(stream in proptest::collection::vec(0.0f64..50.0, 1..80), budget in 0.0f64..20.0) {
        let mut s = PidState::new(0.1, 0.01, 0.01);
        for j in stream {
            let (next, lambda) = pid_update(s, j, budget);
            prop_assert!(next.integral >= 0.0);
            prop_assert!(lambda >= 0.0);
            s = next;
        }
    }
}

#[test]
fn identical_seeds_give_identical_logs() {
    let (a, sa) = train(&toy_spec(), tiny(Method::PpoLag, 3), 3000).unwrap();
    let (b, sb) = train(&toy_spec(), tiny(Method::PpoLag, 3), 3000).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(params_hash(&sa.policy), params_hash(&sb.policy));
    let (c, _) = train(&toy_spec(), tiny(Method::PpoLag, 4), 3000).unwrap();
    assert_ne!(a.to_csv(), c.to_csv());
}

#[test]
fn ppocost_with_zero_factor_is_ppo() {
    let ppo = train(&toy_spec(), tiny(Method::Ppo, 9), 2000).unwrap().0;
    let cost = train(&toy_spec(), TrainConfig { cost_scale: 0.0, ..tiny(Method::PpoCost, 9) }, 2000).unwrap().0;
    assert_eq!(ppo.to_csv(), cost.to_csv());
}

#[test]
fn ppo_keeps_lambda_at_zero() {
    let log = train(&toy_spec(), tiny(Method::Ppo, 1), 2000).unwrap().0;
    assert!(!log.rows.is_empty());
    assert!(log.rows.iter().all(|r| r.lambda == 0.0));
}

#[test]
fn zero_steps_give_an_empty_log() {
    let (log, state) = train(&toy_spec(), tiny(Method::PpoPid, 1), 0).unwrap();
    assert!(log.rows.is_empty());
    assert_eq!(state.steps, 0);
    assert_eq!(log.to_csv().lines().count(), 1);
}

#[test]
fn log_steps_follow_batches() {
    let cfg = tiny(Method::PpoLag, 2);
    let batch = cfg.batch_size() as u64;
    let log = train(&toy_spec(), cfg, 1000).unwrap().0;
    for (i, row) in log.rows.iter().enumerate() {
        assert_eq!(row.step, (i as u64 + 1) * batch);
        // Totals are NaN until the first episodes end, 60 steps into each of 4 envs.
        assert_eq!(row.ret.is_nan(), row.step < 240);
        assert!(row.step < 240 || row.cost >= 0.0);
        assert!(row.lambda >= 0.0);
    }
    assert!(log.rows.last().unwrap().step >= 1000);
}

#[test]
fn checkpoint_round_trip_and_resume() {
    let mut t = Trainer::new(&toy_spec(), tiny(Method::PpoPid, 6)).unwrap();
    t.run(1000, |_| {}).unwrap();
    let state = t.state();
    let bytes = to_bytes(&state);
    let back = from_bytes(&bytes).unwrap();
    assert_eq!(back, state);
    assert_eq!(to_bytes(&back), bytes);

    let mut fresh = Trainer::new(&toy_spec(), tiny(Method::PpoPid, 6)).unwrap();
    fresh.restore(back).unwrap();
    assert_eq!(fresh.steps(), state.steps);
    assert_eq!(params_hash(fresh.policy()), params_hash(&state.policy));

    let mut bad = bytes.clone();
    bad[0] ^= 1;
    assert!(matches!(from_bytes(&bad), Err(TrainError::Checkpoint(_))));
    assert!(matches!(from_bytes(&bytes[..bytes.len() - 3]), Err(TrainError::Checkpoint(_))));

    let mut other = Trainer::new(&toy_spec(), TrainConfig { hidden: vec![8], ..tiny(Method::Ppo, 6) }).unwrap();
    assert!(matches!(other.restore(state), Err(TrainError::ShapeMismatch { .. })));
}

#[test]
fn eval_summary_statistics() {
    let eps = vec![EpisodeTotals { ret: 1.0, cost: 4.0 }, EpisodeTotals { ret: 3.0, cost: 6.0 }];
    let s = EvalSummary::from_episodes(eps, 5.0);
    assert_eq!((s.mean_return, s.std_return, s.mean_cost, s.std_cost), (2.0, 1.0, 5.0, 1.0));
    assert!(s.satisfied);
    let s = EvalSummary::from_episodes(vec![EpisodeTotals { ret: 0.0, cost: 5.5 }], 5.0);
    assert!(!s.satisfied);
}

#[test]
fn evaluation_is_seeded_and_checks_shapes() {
    let mut t = Trainer::new(&toy_spec(), tiny(Method::Ppo, 8)).unwrap();
    t.run(500, |_| {}).unwrap();
    let a = evaluate_policy(t.policy(), &toy_spec(), 3).unwrap();
    let b = evaluate_policy(t.policy(), &toy_spec(), 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.episodes.len(), 3);

    let mut rng = Rng::new(1);
    let wrong: Policy<f32> = Policy::new(3, &[4], &[2], 1.0, &mut rng);
    assert!(matches!(evaluate_policy(&wrong, &toy_spec(), 1), Err(TrainError::ShapeMismatch { .. })));
}

#[test]
fn config_keys_round_trip() {
    let mut cfg = TrainConfig::default();
    assert!(cfg.set("method", "ppopid").unwrap());
    assert!(cfg.set("lr", "0.0003").unwrap());
    assert!(!cfg.set("no_such_key", "1").unwrap());
    assert!(cfg.set("lr", "fast").is_err());
    let mut back = TrainConfig::default();
    for line in cfg.to_kv().lines() {
        let (k, v) = line.split_once('=').unwrap();
        assert!(back.set(k, v).unwrap(), "{k}");
    }
    assert_eq!(back, cfg);
}
