use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::oracles::cover_regime;
use crate::error::{ConfigError, Result};
use crate::game::GameConfig;
use crate::registry::{PolicySpec, Registry, StrategySpec};
use crate::runner::{run_cell, MeanSe};

pub const DEFAULT_N_MIN_GRID: [u32; 10] = [50, 100, 150, 200, 250, 300, 350, 400, 450, 500];
pub const DEFAULT_DELTA_GRID: [f64; 12] = [
    0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.11, 0.12,
];

/// One cell of the (n_min, delta) map with its analytic overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCell {
    pub n_min: u32,
    pub delta: f64,
    pub mean_tau_d: f64,
    pub se_tau_d: f64,
    /// Full-sample threshold at the nominal report `m0 + delta`.
    pub regime_lower: f64,
    /// Small-sample threshold at the nominal report.
    pub regime_upper: f64,
    pub in_regime: bool,
}

/// Mean uncorrected time-to-detection of an attrition auditee with the given
/// `(n_min, delta_cover)` under the periodic policy, row-major in `n_min`.
pub fn regime_map(
    registry: &Registry,
    n_min_grid: &[u32],
    delta_grid: &[f64],
    config: &GameConfig,
    seeds: &[u64],
) -> Result<Vec<RegimeCell>> {
    if n_min_grid.is_empty() || delta_grid.is_empty() || seeds.is_empty() {
        return Err(ConfigError::InvalidSweep("regime map needs non-empty grids and seeds".into()).into());
    }
    let policy = registry.resolve_policy(&PolicySpec::new("periodic"), config.horizon)?;
    let cells: Vec<(u32, f64)> = n_min_grid
        .iter()
        .flat_map(|&n| delta_grid.iter().map(move |&d| (n, d)))
        .collect();
    cells
        .par_iter()
        .map(|&(n_min, delta)| {
            let env = GameConfig { n_min, ..config.clone() };
            env.validate()?;
            let strategy = registry.resolve_strategy(&StrategySpec::new("attrition").param("delta_cover", delta), &env)?;
            let cell = run_cell(registry, &env, &strategy, &policy, seeds, false)?;
            let per_seed: Vec<f64> = cell.per_seed.iter().map(|s| s.metrics.tau_d_uncorr as f64).collect();
            let tau = MeanSe::of(&per_seed);
            let regime = cover_regime((env.m0 + delta).clamp(0.0, 1.0), n_min, env.n_max, env.epsilon, env.z);
            Ok(RegimeCell {
                n_min,
                delta,
                mean_tau_d: tau.mean,
                se_tau_d: tau.se,
                regime_lower: regime.lower,
                regime_upper: regime.upper,
                in_regime: regime.contains(delta),
            })
        })
        .collect()
}
