//! Declarative sweep configs, the strategy x policy x seed runner, and the
//! canonical `sweep.json` output.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};
use crate::game::{make_rng_streams, run_game, GameConfig, Trajectory};
use crate::metrics::{cell_metrics, CellMetrics};
use crate::registry::{PolicySpec, Registry, StrategyContext, StrategySpec};

pub const DEFAULT_SEED_COUNT: u64 = 30;

/// A fully-defaulted, validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Environment; `env.epsilon` carries the configured detection tolerance.
    pub env: GameConfig,
    pub seeds: Vec<u64>,
    pub strategies: Vec<StrategySpec>,
    pub policies: Vec<PolicySpec>,
    pub include_trajectories: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    #[serde(rename = "horizon_T")]
    horizon: Option<usize>,
    m0: Option<f64>,
    sigma: Option<f64>,
    n_max: Option<u32>,
    n_min: Option<u32>,
    epsilon: Option<f64>,
    z: Option<f64>,
    #[serde(rename = "population_N")]
    population: Option<u32>,
    alpha: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSeeds {
    Count(u64),
    List(Vec<u64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    env: Option<RawEnv>,
    seeds: Option<RawSeeds>,
    detection_epsilon: Option<f64>,
    strategies: Vec<StrategySpec>,
    policies: Vec<PolicySpec>,
    #[serde(default)]
    include_trajectories: bool,
}

impl RawEnv {
    fn into_config(self) -> GameConfig {
        let d = GameConfig::default();
        let n_max = self.n_max.unwrap_or(d.n_max);
        GameConfig {
            horizon: self.horizon.unwrap_or(d.horizon),
            m0: self.m0.unwrap_or(d.m0),
            sigma: self.sigma.unwrap_or(d.sigma),
            n_max,
            n_min: self.n_min.unwrap_or(d.n_min),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            z: self.z.unwrap_or(d.z),
            population: self.population.unwrap_or(n_max),
            alpha: self.alpha.unwrap_or(d.alpha),
        }
    }
}

impl SweepConfig {
    /// Parses a YAML document and resolves it against `registry`.
    pub fn from_yaml(text: &str, registry: &Registry) -> Result<Self, ConfigError> {
        let raw: RawSweep = serde_yaml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut env = raw
            .env
            .map(RawEnv::into_config)
            .unwrap_or_default();
        if let Some(eps) = raw.detection_epsilon {
            env.epsilon = eps;
        }
        let seeds = match raw.seeds {
            None => (0..DEFAULT_SEED_COUNT).collect(),
            Some(RawSeeds::Count(n)) => (0..n).collect(),
            Some(RawSeeds::List(list)) => list,
        };
        Self {
            env,
            seeds,
            strategies: raw.strategies,
            policies: raw.policies,
            include_trajectories: raw.include_trajectories,
        }
        .resolved(registry)
    }

    /// Validates everything and replaces specs with their canonical, fully
    /// parameterised form.
    pub fn resolved(mut self, registry: &Registry) -> Result<Self, ConfigError> {
        self.env.validate()?;
        if self.seeds.is_empty() {
            return Err(ConfigError::InvalidSweep("at least one seed is required".into()));
        }
        let unique: BTreeSet<u64> = self.seeds.iter().copied().collect();
        if unique.len() != self.seeds.len() {
            return Err(ConfigError::InvalidSweep("seed list contains duplicates".into()));
        }
        if self.strategies.is_empty() || self.policies.is_empty() {
            return Err(ConfigError::InvalidSweep(
                "need at least one strategy and one policy".into(),
            ));
        }
        self.strategies = self
            .strategies
            .iter()
            .map(|s| registry.resolve_strategy(s, &self.env))
            .collect::<Result<_, _>>()?;
        self.policies = self
            .policies
            .iter()
            .map(|p| registry.resolve_policy(p, self.env.horizon))
            .collect::<Result<_, _>>()?;
        Ok(self)
    }

    /// Applies a `key=value` override: `seeds`, `detection_epsilon` (alias
    /// `epsilon`) or `include_trajectories`.
    pub fn apply_override(mut self, key: &str, value: &str, registry: &Registry) -> Result<Self, ConfigError> {
        let bad = |what: &str| ConfigError::InvalidSweep(format!("override {key}={value}: {what}"));
        match key {
            "seeds" => {
                let n: u64 = value.parse().map_err(|_| bad("expected a seed count"))?;
                self.seeds = (0..n).collect();
            }
            "detection_epsilon" | "epsilon" => {
                self.env.epsilon = value.parse().map_err(|_| bad("expected a number"))?;
            }
            "include_trajectories" => {
                self.include_trajectories = value.parse().map_err(|_| bad("expected true or false"))?;
            }
            _ => return Err(bad("unknown override key")),
        }
        self.resolved(registry)
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path, registry: &Registry) -> Result<SweepConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    SweepConfig::from_yaml(&text, registry)
}

/// One seed's outcome.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: u64,
    pub trajectory: Trajectory,
    pub metrics: CellMetrics,
    pub sample_floor: Option<u32>,
}

/// Commits the policy's schedule from the trial's schedule stream, discloses it
/// to a fresh auditee, and plays one game.
pub fn run_trial(
    registry: &Registry,
    config: &GameConfig,
    strategy: &StrategySpec,
    policy: &PolicySpec,
    seed: u64,
) -> Result<TrialOutcome> {
    let mut streams = make_rng_streams(seed, policy.schedule_seed_base());
    let mut auditor = registry.build_policy(policy, config.horizon, &mut streams.schedule)?;
    let disclosed = auditor.committed_schedule().clone();
    let mut auditee = registry.build_strategy(
        strategy,
        &StrategyContext {
            config,
            disclosed: &disclosed,
        },
    )?;
    let trajectory =
        run_game(config, auditee.as_mut(), auditor.as_mut(), &mut streams).map_err(|source| Error::Trial {
            strategy: strategy.name.clone(),
            policy: policy.name.clone(),
            seed,
            source,
        })?;
    let sample_floor = auditor.sample_floor();
    let metrics = cell_metrics(&trajectory, config, sample_floor);
    Ok(TrialOutcome {
        seed,
        trajectory,
        metrics,
        sample_floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    /// Mean and `sd / sqrt(n)`; the SE is exactly 0 when all values agree.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN };
        }
        if values.iter().all(|v| v.to_bits() == values[0].to_bits()) {
            return Self { mean: values[0], se: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self {
            mean,
            se: (var / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: CellMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedTrajectory {
    pub seed: u64,
    pub rounds: Vec<crate::game::RoundRecord>,
}

/// Mean +- SE of every metric over the seeds of one (strategy, policy) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub strategy: String,
    pub policy: String,
    pub gap: MeanSe,
    pub tau_d_uncorr: MeanSe,
    pub tau_d_bonf: MeanSe,
    #[serde(rename = "W")]
    pub welfare: MeanSe,
    #[serde(rename = "C")]
    pub coverage: MeanSe,
    #[serde(rename = "realized_K")]
    pub realized_k: MeanSe,
    pub per_seed: Vec<SeedMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<Vec<SeedTrajectory>>,
}

impl CellAggregate {
    /// Reduces per-seed outcomes in ascending seed order, independent of the
    /// order they were produced in.
    pub fn from_outcomes(
        strategy: &str,
        policy: &str,
        mut outcomes: Vec<TrialOutcome>,
        keep_trajectories: bool,
    ) -> Self {
        outcomes.sort_by_key(|o| o.seed);
        let column = |f: fn(&CellMetrics) -> f64| {
            let values: Vec<f64> = outcomes.iter().map(|o| f(&o.metrics)).collect();
            MeanSe::of(&values)
        };
        Self {
            strategy: strategy.to_owned(),
            policy: policy.to_owned(),
            gap: column(|m| m.gap),
            tau_d_uncorr: column(|m| m.tau_d_uncorr as f64),
            tau_d_bonf: column(|m| m.tau_d_bonf as f64),
            welfare: column(|m| m.welfare),
            coverage: column(|m| m.coverage),
            realized_k: column(|m| m.realized_k as f64),
            per_seed: outcomes
                .iter()
                .map(|o| SeedMetrics {
                    seed: o.seed,
                    metrics: o.metrics,
                })
                .collect(),
            trajectories: keep_trajectories.then(|| {
                outcomes
                    .iter()
                    .map(|o| SeedTrajectory {
                        seed: o.seed,
                        rounds: o.trajectory.rounds.clone(),
                    })
                    .collect()
            }),
        }
    }
}

/// Sizes the global worker pool; must be called before the first sweep.
pub fn set_threads(threads: usize) -> std::result::Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()
}

/// Runs every seed of one cell (in parallel) and aggregates.
pub fn run_cell(
    registry: &Registry,
    config: &GameConfig,
    strategy: &StrategySpec,
    policy: &PolicySpec,
    seeds: &[u64],
    keep_trajectories: bool,
) -> Result<CellAggregate> {
    let outcomes = seeds
        .par_iter()
        .map(|&seed| run_trial(registry, config, strategy, policy, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(CellAggregate::from_outcomes(
        &strategy.name,
        &policy.name,
        outcomes,
        keep_trajectories,
    ))
}

/// Full result of a sweep. `elapsed` is reported to the caller but never
/// serialized, so reruns produce byte-identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub version: String,
    pub config: SweepConfig,
    pub cells: Vec<CellAggregate>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SweepResult {
    pub fn cell(&self, strategy: &str, policy: &str) -> Option<&CellAggregate> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.policy == policy)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))?;
        out.push('\n');
        Ok(out)
    }

    /// Writes `<dir>/sweep.json`, creating `dir` if needed.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let json = self.to_json()?;
        write_output(dir, "sweep.json", &json)
    }
}

/// Writes `contents` to `dir/file`, creating `dir` if needed.
pub fn write_output(dir: &Path, file: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(file);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .map_err(|source| Error::Output {
            path: path.clone(),
            source,
        })?;
    Ok(path)
}

/// Runs the full strategy x policy grid, strategy-major.
pub fn run_sweep(registry: &Registry, config: &SweepConfig) -> Result<SweepResult> {
    let start = Instant::now();
    let pairs: Vec<(&StrategySpec, &PolicySpec)> = config
        .strategies
        .iter()
        .flat_map(|s| config.policies.iter().map(move |p| (s, p)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|(s, p)| run_cell(registry, &config.env, s, p, &config.seeds, config.include_trajectories))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: config.clone(),
        cells,
        elapsed: start.elapsed(),
    })
}

/// The two shipped experiment configs.
pub mod shipped {
    pub const DEFAULT: &str = include_str!("../configs/default.yaml");
    pub const ATTRITION: &str = include_str!("../configs/attrition.yaml");

    /// Looks up a shipped config by short name (`default`, `attrition`).
    pub fn by_name(name: &str) -> Option<&'static str> {
        match name {
            "default" => Some(DEFAULT),
            "attrition" => Some(ATTRITION),
            _ => None,
        }
    }
}
