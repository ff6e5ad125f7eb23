use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::GameConfig;
use crate::metrics::{bonferroni_z, exceeds_threshold};
use crate::registry::{PolicySpec, Registry, StrategySpec};
use crate::runner::{run_trial, TrialOutcome};

/// Empirical false-positive rates for one policy under honest-noisy reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FprRow {
    pub policy: String,
    pub mean_k: f64,
    pub per_round_uncorr: f64,
    pub per_round_bonf: f64,
    pub fwer_uncorr: f64,
    pub fwer_bonf: f64,
    pub seeds: usize,
    pub audited_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FprReport {
    pub alpha: f64,
    pub z: f64,
    pub rows: Vec<FprRow>,
}

impl FprReport {
    pub fn row(&self, policy: &str) -> Option<&FprRow> {
        self.rows.iter().find(|r| r.policy == policy)
    }
}

struct SeedFirings {
    audited: usize,
    uncorr: usize,
    bonf: usize,
}

fn count_firings(outcome: &TrialOutcome, config: &GameConfig) -> SeedFirings {
    let floor = outcome.sample_floor;
    let k = outcome.trajectory.realized_audit_set.len();
    let z_bonf = bonferroni_z(k, config.alpha);
    let fires = |z: f64| {
        outcome
            .trajectory
            .audited()
            .filter(|r| {
                floor.is_some_and(|f| r.n_t < f)
                    || exceeds_threshold(r.reported_metric, r.true_metric, r.n_t, config.epsilon, z)
            })
            .count()
    };
    SeedFirings {
        audited: k,
        uncorr: fires(config.z),
        bonf: z_bonf.map_or(0, fires),
    }
}

/// Runs the honest-noisy auditee against each policy. Per-round rates are
/// firings over audited rounds; FWER is the fraction of seeds with any firing.
/// Every realized audited round counts, including escalated ones.
pub fn fpr_experiment(
    registry: &Registry,
    policies: &[PolicySpec],
    seeds: &[u64],
    config: &GameConfig,
) -> Result<FprReport> {
    let strategy = StrategySpec::new("honest_noisy");
    let rows = policies
        .iter()
        .map(|policy| {
            let per_seed = seeds
                .par_iter()
                .map(|&seed| {
                    run_trial(registry, config, &strategy, policy, seed).map(|o| count_firings(&o, config))
                })
                .collect::<Result<Vec<_>>>()?;
            let audited: usize = per_seed.iter().map(|s| s.audited).sum();
            let rate = |f: fn(&SeedFirings) -> usize| {
                per_seed.iter().map(f).sum::<usize>() as f64 / audited.max(1) as f64
            };
            let fwer = |f: fn(&SeedFirings) -> usize| {
                per_seed.iter().filter(|s| f(s) > 0).count() as f64 / per_seed.len() as f64
            };
            Ok(FprRow {
                policy: policy.name.clone(),
                mean_k: audited as f64 / per_seed.len() as f64,
                per_round_uncorr: rate(|s| s.uncorr),
                per_round_bonf: rate(|s| s.bonf),
                fwer_uncorr: fwer(|s| s.uncorr),
                fwer_bonf: fwer(|s| s.bonf),
                seeds: per_seed.len(),
                audited_rounds: audited,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FprReport {
        alpha: config.alpha,
        z: config.z,
        rows,
    })
}
