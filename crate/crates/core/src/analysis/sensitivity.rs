use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};
use crate::game::{make_rng_streams, run_game, GameConfig};
use crate::metrics::time_to_detection;
use crate::policies::StaticPolicy;
use crate::registry::{PolicySpec, Registry, StrategySpec};
use crate::runner::run_cell;
use crate::strategies::HonestAuditee;

/// One point on a detection-rate curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub series: String,
    pub x: f64,
    pub rate: f64,
    pub seeds: usize,
}

fn detection_rate(
    registry: &Registry,
    config: &GameConfig,
    strategy: &StrategySpec,
    policy: &PolicySpec,
    seeds: &[u64],
) -> Result<f64> {
    let cell = run_cell(registry, config, strategy, policy, seeds, false)?;
    let detected = cell
        .per_seed
        .iter()
        .filter(|s| s.metrics.tau_d_uncorr < config.horizon)
        .count();
    Ok(detected as f64 / seeds.len() as f64)
}

/// Detection-rate curves for the two adaptive policies, with rates being
/// the fraction of seeds detected under the uncorrected rule.
///
/// * `min_sample_floor`: `grid` is read both as `n_floor` values for the TPR
///   against an always-attriting auditee (fixed at `n_min`), and as operating
///   sample sizes `n_t` for the FPR of an honest auditee under the configured
///   floor.
/// * `suspicion_escalation`: `grid` holds drift magnitudes; TPR against Drift
///   and FPR against the exact Honest auditee.
pub fn sensitivity_curves(
    registry: &Registry,
    policy: &PolicySpec,
    grid: &[f64],
    config: &GameConfig,
    seeds: &[u64],
) -> Result<Vec<SensitivityPoint>> {
    if grid.is_empty() || seeds.is_empty() {
        return Err(ConfigError::InvalidSweep("sensitivity curves need a grid and seeds".into()).into());
    }
    let policy = registry.resolve_policy(policy, config.horizon)?;
    let point = |series: &str, x: f64, rate: f64| SensitivityPoint {
        series: series.to_owned(),
        x,
        rate,
        seeds: seeds.len(),
    };
    match policy.name.as_str() {
        "min_sample_floor" => {
            let period = policy.params.get("k").unwrap_or(3.0) as usize;
            let phase = policy.params.get("phase").unwrap_or(2.0) as usize;
            let floor = policy.params.get("n_floor").unwrap_or(500.0) as u32;
            // tau above any attainable truth keeps the auditee at n_min every round
            let attrition = StrategySpec::new("attrition").param("tau", 2.0);
            let tpr = grid
                .par_iter()
                .map(|&n_floor| {
                    let p = policy.clone().param("n_floor", n_floor);
                    let rate = detection_rate(registry, config, &attrition, &registry.resolve_policy(&p, config.horizon)?, seeds)?;
                    Ok(point("tpr_attrition_vs_n_floor", n_floor, rate))
                })
                .collect::<Result<Vec<_>>>()?;
            let fpr = grid
                .par_iter()
                .map(|&n_t| {
                    if !(n_t >= 1.0 && n_t <= f64::from(config.population) && n_t.fract() == 0.0) {
                        return Err(ConfigError::InvalidSweep(format!(
                            "operating sample size {n_t} must be an integer in [1, {}]",
                            config.population
                        ))
                        .into());
                    }
                    let mut detected = 0usize;
                    for &seed in seeds {
                        let mut streams = make_rng_streams(seed, 0);
                        let mut auditor = StaticPolicy::min_sample_floor(period, phase, floor, config.horizon)?;
                        let mut auditee = HonestAuditee { n_t: n_t as u32 };
                        let traj = run_game(config, &mut auditee, &mut auditor, &mut streams)
                            .expect("honest auditee satisfies the game contract");
                        if time_to_detection(&traj, Some(floor), config.epsilon, config.z) < config.horizon {
                            detected += 1;
                        }
                    }
                    Ok(point("fpr_honest_vs_n_t", n_t, detected as f64 / seeds.len() as f64))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(tpr.into_iter().chain(fpr).collect())
        }
        "suspicion_escalation" => {
            let honest = StrategySpec::new("honest");
            let fpr = detection_rate(registry, config, &honest, &policy, seeds)?;
            let tpr = grid
                .par_iter()
                .map(|&delta| {
                    let drift = StrategySpec::new("drift").param("delta", delta);
                    let rate = detection_rate(registry, config, &drift, &policy, seeds)?;
                    Ok(point("tpr_drift_vs_delta", delta, rate))
                })
                .collect::<Result<Vec<_>>>()?;
            let fpr = grid.iter().map(|&delta| point("fpr_honest_vs_delta", delta, fpr));
            Ok(tpr.into_iter().chain(fpr).collect())
        }
        other => Err(ConfigError::InvalidSweep(format!(
            "sensitivity curves are defined for min_sample_floor and suspicion_escalation, not {other}"
        ))
        .into()),
    }
}
