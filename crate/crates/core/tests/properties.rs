use audit_game::analysis::{expected_min_audited_round, regime_map, sensitivity_curves};
use audit_game::game::{run_game, AuditObservation, Auditor, GameConfig, RoundRecord, Trajectory};
use audit_game::metrics::{bonferroni_z, coverage_loss, detection_threshold, welfare_loss};
use audit_game::policies::{scheduled_random_schedule, StaticPolicy, SuspicionEscalationPolicy};
use audit_game::registry::{PolicySpec, Registry, StrategySpec};
use audit_game::runner::{run_trial, CellAggregate, TrialOutcome};
use audit_game::strategies::HonestAuditee;
use audit_game::game::SCHEDULE_SEED_STRIDE;
use audit_game::{make_rng_streams, run_sweep, SweepConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reg() -> &'static Registry {
    Registry::builtin()
}

// Simpson-integrated standard normal CDF, inverted by bisection.
fn phi(x: f64) -> f64 {
    let panels = 20_000;
    let h = x.abs() / panels as f64;
    let f = |u: f64| (-0.5 * u * u).exp();
    let mut s = f(0.0) + f(x.abs());
    for i in 1..panels {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let half = s * h / 3.0 / (2.0 * std::f64::consts::PI).sqrt();
    if x >= 0.0 { 0.5 + half } else { 0.5 - half }
}

fn quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < p { lo = mid } else { hi = mid }
    }
    0.5 * (lo + hi)
}

fn record(t: usize, truth: f64, reported: f64, n_t: u32, audited: bool) -> RoundRecord {
    RoundRecord { t, true_metric: truth, reported_metric: reported, n_t, audited }
}

#[test]
fn bonferroni_matches_independent_quantile() {
    for k in 1..=12 {
        let want = quantile(1.0 - 0.05 / (2.0 * k as f64));
        let got = bonferroni_z(k, 0.05).unwrap();
        assert!((got - want).abs() < 1e-6, "K={k}: {got} vs {want}");
    }
    assert!(bonferroni_z(0, 0.05).is_none());
}

#[test]
fn sweep_files_are_byte_identical() {
    let config = SweepConfig::from_yaml(audit_game::runner::shipped::DEFAULT, reg()).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let pa = run_sweep(reg(), &config).unwrap().write(a.path()).unwrap();
    let pb = run_sweep(reg(), &config).unwrap().write(b.path()).unwrap();
    assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
}

#[test]
fn schedule_seeds_are_pairwise_distinct() {
    let seeds: std::collections::BTreeSet<u64> =
        (0..200).map(|s| make_rng_streams(s, 42).schedule_seed).collect();
    assert_eq!(seeds.len(), 200);
    assert_eq!(make_rng_streams(3, 42).schedule_seed, 42 + 3 * SCHEDULE_SEED_STRIDE);
}

#[test]
fn scheduled_random_mean_first_round_matches_order_statistic() {
    let n = 20_000;
    let total: usize = (0..n)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            *scheduled_random_schedule(4, 12, &mut rng).unwrap().iter().next().unwrap()
        })
        .sum();
    let mean = total as f64 / n as f64;
    assert!((mean - expected_min_audited_round(12, 4).unwrap()).abs() < 0.05, "{mean}");
}

#[test]
fn regime_map_agrees_with_oracle_without_noise() {
    let config = GameConfig { sigma: 0.0, ..GameConfig::attrition() };
    let cells = regime_map(reg(), &[50, 100, 200, 400, 500], &[0.02, 0.04, 0.05, 0.08, 0.1, 0.12], &config, &[0, 1]).unwrap();
    for c in cells {
        let never = c.mean_tau_d == 12.0;
        assert_eq!(never, c.delta <= c.regime_upper, "{c:?}");
    }
}

#[test]
fn floor_sensitivity_steps_at_n_min() {
    let config = GameConfig::default();
    let spec = PolicySpec::new("min_sample_floor");
    let points = sensitivity_curves(reg(), &spec, &[50.0, 100.0, 101.0, 500.0], &config, &[0, 1, 2]).unwrap();
    let tpr: Vec<f64> = points.iter().filter(|p| p.series == "tpr_attrition_vs_n_floor").map(|p| p.rate).collect();
    assert_eq!(tpr, vec![0.0, 0.0, 1.0, 1.0]);
    let fpr: Vec<f64> = points.iter().filter(|p| p.series == "fpr_honest_vs_n_t").map(|p| p.rate).collect();
    assert_eq!(fpr, vec![1.0, 1.0, 1.0, 0.0]);
}

#[test]
fn escalation_sensitivity_has_zero_honest_fpr() {
    let points = sensitivity_curves(reg(), &PolicySpec::new("suspicion_escalation"), &[0.01, 0.05, 0.1], &GameConfig::default(), &[0, 1]).unwrap();
    assert!(points.iter().filter(|p| p.series == "fpr_honest_vs_delta").all(|p| p.rate == 0.0));
    assert!(points.iter().any(|p| p.series == "tpr_drift_vs_delta" && p.rate == 1.0));
}

#[test]
fn attrition_branch_fires_at_expected_rate() {
    // P(m_t < tau) with m0 = 0.30, tau = 0.40: the truth rarely climbs 0.1 in 12 steps
    let config = GameConfig::attrition();
    let s = reg().resolve_strategy(&StrategySpec::new("attrition"), &config).unwrap();
    let p = reg().resolve_policy(&PolicySpec::new("periodic"), 12).unwrap();
    let (mut fired, mut total) = (0, 0);
    for seed in 0..200 {
        let o = run_trial(reg(), &config, &s, &p, seed).unwrap();
        for r in &o.trajectory.rounds {
            total += 1;
            if r.n_t == config.n_min {
                fired += 1;
                assert!(r.true_metric < 0.4);
            } else {
                assert!(r.true_metric >= 0.4);
            }
        }
    }
    assert!(fired as f64 / total as f64 > 0.95);
}

proptest! {
    #[test]
    fn threshold_decreases_in_n(p in 0.01f64..0.99, n in 1u32..5000, eps in 0.0f64..0.1) {
        prop_assert!(detection_threshold(p, n + 1, eps, 1.96) < detection_threshold(p, n, eps, 1.96));
    }

    #[test]
    fn bonferroni_dominates(k in 2usize..50) {
        prop_assert!(bonferroni_z(k, 0.05).unwrap() > bonferroni_z(k - 1, 0.05).unwrap());
        prop_assert!(bonferroni_z(k, 0.05).unwrap() > 1.959);
    }

    #[test]
    fn escalation_latches(threshold in 0.001f64..0.2, excess in 0.0001f64..0.5, t0 in 0usize..11) {
        let mut p = SuspicionEscalationPolicy::new(4, threshold, 12).unwrap();
        let obs = [AuditObservation { t: t0, reported_metric: 0.5 + threshold + excess, verified_metric: 0.5, n_t: 1000, flagged: false }];
        for t in t0 + 1..12 {
            prop_assert!(p.audit_this_round(t, 12, &obs));
            prop_assert!(p.is_escalated());
        }
    }

    #[test]
    fn honest_trial_is_harmless(seed in any::<u64>(), policy in 0usize..5) {
        let name = ["one_shot", "periodic", "scheduled_random", "min_sample_floor", "suspicion_escalation"][policy];
        let config = GameConfig::default();
        let s = reg().resolve_strategy(&StrategySpec::new("honest"), &config).unwrap();
        let p = reg().resolve_policy(&PolicySpec::new(name), 12).unwrap();
        let o = run_trial(reg(), &config, &s, &p, seed).unwrap();
        prop_assert_eq!(o.metrics.welfare, 0.0);
        prop_assert_eq!(o.metrics.coverage, 0.0);
        prop_assert_eq!(o.metrics.tau_d_uncorr, 12);
    }

    #[test]
    fn trials_are_deterministic(seed in any::<u64>(), strategy in 0usize..6) {
        let name = ["honest", "delay", "drift", "cherry_pick", "attrition", "off_audit_drift"][strategy];
        let config = GameConfig::default();
        let s = reg().resolve_strategy(&StrategySpec::new(name), &config).unwrap();
        let p = reg().resolve_policy(&PolicySpec::new("scheduled_random"), 12).unwrap();
        let a = run_trial(reg(), &config, &s, &p, seed).unwrap();
        let b = run_trial(reg(), &config, &s, &p, seed).unwrap();
        prop_assert_eq!(a.trajectory, b.trajectory);
    }

    #[test]
    fn welfare_is_additive_over_unaudited_rounds(
        rounds in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, any::<bool>()), 1..20),
        split in 0usize..20,
    ) {
        let recs: Vec<RoundRecord> = rounds.iter().enumerate()
            .map(|(t, &(m, r, a))| record(t, m, r, 1000, a)).collect();
        let split = split.min(recs.len());
        let whole = welfare_loss(&Trajectory::from_rounds(recs.clone()));
        let left = welfare_loss(&Trajectory::from_rounds(recs[..split].to_vec()));
        let right = welfare_loss(&Trajectory::from_rounds(recs[split..].to_vec()));
        prop_assert!((whole - left - right).abs() < 1e-9);
        prop_assert!(whole >= 0.0);
        prop_assert!(coverage_loss(&Trajectory::from_rounds(recs), 1000) >= 0.0);
    }

    #[test]
    fn aggregation_ignores_order(perm in Just((0u64..12).collect::<Vec<_>>()).prop_shuffle()) {
        let config = GameConfig::default();
        let s = reg().resolve_strategy(&StrategySpec::new("cherry_pick"), &config).unwrap();
        let p = reg().resolve_policy(&PolicySpec::new("periodic"), 12).unwrap();
        let run = |seeds: &[u64]| -> Vec<TrialOutcome> {
            seeds.iter().map(|&s0| run_trial(reg(), &config, &s, &p, s0).unwrap()).collect()
        };
        let sorted: Vec<u64> = (0..12).collect();
        let a = CellAggregate::from_outcomes("cherry_pick", "periodic", run(&sorted), true);
        let b = CellAggregate::from_outcomes("cherry_pick", "periodic", run(&perm), true);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn floor_policy_flags_exactly_below_floor(n_t in 1u32..1000, floor in 1u32..1000) {
        let config = GameConfig { n_min: 1, ..GameConfig::default() };
        let mut auditee = HonestAuditee { n_t };
        let mut auditor = StaticPolicy::min_sample_floor(3, 2, floor, 12).unwrap();
        let mut streams = make_rng_streams(0, 0);
        let traj = run_game(&config, &mut auditee, &mut auditor, &mut streams).unwrap();
        let floor_arm = auditor.sample_floor().unwrap();
        let tau = audit_game::time_to_detection(&traj, Some(floor_arm), 0.0, 1.96);
        prop_assert_eq!(tau == 2, n_t < floor);
    }
}
