//! Name-keyed registries of strategies and policies, and the specs that
//! select them from a config file.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::game::{Auditee, Auditor, GameConfig};
use crate::params::{invalid, Params};
use crate::policies::{StaticPolicy, SuspicionEscalationPolicy};
use crate::strategies::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub name: String,
    #[serde(default)]
    pub params: Params,
}

impl StrategySpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_owned(),
            params: Params::new(),
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key, value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub name: String,
    #[serde(default)]
    pub params: Params,
}

impl PolicySpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_owned(),
            params: Params::new(),
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key, value);
        self
    }

    /// Base seed for the committed-schedule stream; 0 for policies without a `seed`.
    pub fn schedule_seed_base(&self) -> u64 {
        self.params.get("seed").map_or(0, |s| s as u64)
    }
}

/// What a strategy may know when it is constructed.
pub struct StrategyContext<'a> {
    pub config: &'a GameConfig,
    /// The auditor's disclosed audit set (public deterministic schedule).
    pub disclosed: &'a BTreeSet<usize>,
}

pub type StrategyFactory =
    Arc<dyn Fn(&Params, &StrategyContext<'_>) -> Result<Box<dyn Auditee>, ConfigError> + Send + Sync>;
pub type PolicyFactory =
    Arc<dyn Fn(&Params, usize, &mut dyn RngCore) -> Result<Box<dyn Auditor>, ConfigError> + Send + Sync>;

/// Maps user-supplied params to the full default set (some defaults depend on
/// other params).
pub type DefaultsFn = fn(&Params) -> Params;

struct StrategyEntry {
    defaults: DefaultsFn,
    factory: StrategyFactory,
}

struct PolicyEntry {
    defaults: DefaultsFn,
    factory: PolicyFactory,
}

#[derive(Default)]
pub struct Registry {
    strategies: BTreeMap<String, StrategyEntry>,
    policies: BTreeMap<String, PolicyEntry>,
    policy_aliases: BTreeMap<String, String>,
}

fn as_count(params: &Params, owner: &str, key: &str, min: u64) -> Result<usize, ConfigError> {
    params.count(owner, key, min).map(|v| v as usize)
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Shared instance holding the built-in strategies and policies.
    pub fn builtin() -> &'static Registry {
        static BUILTIN: OnceLock<Registry> = OnceLock::new();
        BUILTIN.get_or_init(Registry::with_builtins)
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();

        r.register_strategy("honest", |_| Params::new(), |_, ctx| {
            Ok(Box::new(HonestAuditee { n_t: ctx.config.n_max }))
        });
        r.register_strategy("honest_noisy", |_| Params::new(), |_, ctx| {
            Ok(Box::new(HonestNoisyAuditee { n_t: ctx.config.n_max }))
        });
        r.register_strategy("delay", |_| Params::from([("k", 2.0)]), |p, ctx| {
            let lag = as_count(p, "delay", "k", 1)?;
            Ok(Box::new(DelayStrategy::new(lag, ctx.config.n_max)))
        });
        r.register_strategy("drift", |_| Params::from([("delta", 0.05)]), |p, ctx| {
            Ok(Box::new(DriftStrategy {
                delta: p.real("drift", "delta")?,
                n_max: ctx.config.n_max,
            }))
        });
        r.register_strategy(
            "cherry_pick",
            |_| Params::from([("K", 5.0), ("sigma_pick", 0.04)]),
            |p, ctx| {
                Ok(Box::new(CherryPickStrategy {
                    candidates: as_count(p, "cherry_pick", "K", 1)?,
                    sigma_pick: p.non_negative("cherry_pick", "sigma_pick")?,
                    n_max: ctx.config.n_max,
                }))
            },
        );
        r.register_strategy(
            "attrition",
            |_| Params::from([("tau", 0.40), ("delta_cover", 0.05)]),
            |p, ctx| {
                Ok(Box::new(AttritionStrategy {
                    tau: p.real("attrition", "tau")?,
                    delta_cover: p.real("attrition", "delta_cover")?,
                    n_max: ctx.config.n_max,
                    n_min: ctx.config.n_min,
                }))
            },
        );
        r.register_strategy("off_audit_drift", |_| Params::from([("delta", 0.05)]), |p, ctx| {
            Ok(Box::new(OffAuditDriftStrategy {
                delta: p.real("off_audit_drift", "delta")?,
                n_max: ctx.config.n_max,
                committed: ctx.disclosed.clone(),
            }))
        });

        r.register_policy("one_shot", |_| Params::from([("t_star", 5.0)]), |p, horizon, _| {
            Ok(Box::new(StaticPolicy::one_shot(as_count(p, "one_shot", "t_star", 0)?, horizon)?))
        });
        r.register_policy("periodic", periodic_defaults, |p, horizon, _| {
            let (period, phase) = cadence(p, "periodic")?;
            Ok(Box::new(StaticPolicy::periodic(period, phase, horizon)?))
        });
        r.register_policy(
            "scheduled_random",
            |_| Params::from([("K", 4.0), ("seed", 42.0)]),
            |p, horizon, rng| {
                as_count(p, "scheduled_random", "seed", 0)?;
                let count = as_count(p, "scheduled_random", "K", 1)?;
                Ok(Box::new(StaticPolicy::scheduled_random(count, horizon, rng)?))
            },
        );
        r.alias_policy("surprise", "scheduled_random");
        r.register_policy(
            "min_sample_floor",
            |user| {
                let mut out = periodic_defaults(user);
                out.insert("n_floor", 500.0);
                out
            },
            |p, horizon, _| {
                let (period, phase) = cadence(p, "min_sample_floor")?;
                let n_floor = as_count(p, "min_sample_floor", "n_floor", 1)? as u32;
                Ok(Box::new(StaticPolicy::min_sample_floor(period, phase, n_floor, horizon)?))
            },
        );
        r.register_policy(
            "suspicion_escalation",
            |_| Params::from([("base_period", 4.0), ("threshold", 0.04)]),
            |p, horizon, _| {
                Ok(Box::new(SuspicionEscalationPolicy::new(
                    as_count(p, "suspicion_escalation", "base_period", 1)?,
                    p.non_negative("suspicion_escalation", "threshold")?,
                    horizon,
                )?))
            },
        );
        r
    }

    pub fn register_strategy<F>(&mut self, name: &str, defaults: DefaultsFn, factory: F)
    where
        F: Fn(&Params, &StrategyContext<'_>) -> Result<Box<dyn Auditee>, ConfigError> + Send + Sync + 'static,
    {
        self.strategies.insert(
            name.to_owned(),
            StrategyEntry {
                defaults,
                factory: Arc::new(factory),
            },
        );
    }

    pub fn register_policy<F>(&mut self, name: &str, defaults: DefaultsFn, factory: F)
    where
        F: Fn(&Params, usize, &mut dyn RngCore) -> Result<Box<dyn Auditor>, ConfigError> + Send + Sync + 'static,
    {
        self.policies.insert(
            name.to_owned(),
            PolicyEntry {
                defaults,
                factory: Arc::new(factory),
            },
        );
    }

    pub fn alias_policy(&mut self, alias: &str, target: &str) {
        self.policy_aliases.insert(alias.to_owned(), target.to_owned());
    }

    pub fn strategy_names(&self) -> impl Iterator<Item = &str> {
        self.strategies.keys().map(String::as_str)
    }

    pub fn policy_names(&self) -> impl Iterator<Item = &str> {
        self.policies.keys().map(String::as_str)
    }

    fn strategy_entry(&self, name: &str) -> Result<&StrategyEntry, ConfigError> {
        self.strategies
            .get(name)
            .ok_or_else(|| ConfigError::UnknownStrategy(name.to_owned()))
    }

    fn policy_entry(&self, name: &str) -> Result<(&str, &PolicyEntry), ConfigError> {
        let canonical = self.policy_aliases.get(name).map_or(name, String::as_str);
        self.policies
            .get_key_value(canonical)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| ConfigError::UnknownPolicy(name.to_owned()))
    }

    /// Canonical spec with every parameter filled in, validated against `config`.
    pub fn resolve_strategy(&self, spec: &StrategySpec, config: &GameConfig) -> Result<StrategySpec, ConfigError> {
        let entry = self.strategy_entry(&spec.name)?;
        let params = spec.params.completed(&spec.name, (entry.defaults)(&spec.params))?;
        let ctx = StrategyContext {
            config,
            disclosed: &BTreeSet::new(),
        };
        (entry.factory)(&params, &ctx)?;
        Ok(StrategySpec {
            name: spec.name.clone(),
            params,
        })
    }

    /// Canonical spec (aliases resolved) with every parameter filled in and the
    /// schedule validated against `horizon`.
    pub fn resolve_policy(&self, spec: &PolicySpec, horizon: usize) -> Result<PolicySpec, ConfigError> {
        let (canonical, entry) = self.policy_entry(&spec.name)?;
        let params = spec.params.completed(canonical, (entry.defaults)(&spec.params))?;
        let mut scratch = ChaCha8Rng::seed_from_u64(0);
        (entry.factory)(&params, horizon, &mut scratch)?;
        Ok(PolicySpec {
            name: canonical.to_owned(),
            params,
        })
    }

    /// Fresh auditee. `spec` params are completed with defaults.
    pub fn build_strategy(&self, spec: &StrategySpec, ctx: &StrategyContext<'_>) -> Result<Box<dyn Auditee>, ConfigError> {
        let entry = self.strategy_entry(&spec.name)?;
        let params = spec.params.completed(&spec.name, (entry.defaults)(&spec.params))?;
        (entry.factory)(&params, ctx)
    }

    /// Fresh auditor with its schedule committed from `schedule_rng`.
    pub fn build_policy(
        &self,
        spec: &PolicySpec,
        horizon: usize,
        schedule_rng: &mut dyn RngCore,
    ) -> Result<Box<dyn Auditor>, ConfigError> {
        let (canonical, entry) = self.policy_entry(&spec.name)?;
        let params = spec.params.completed(canonical, (entry.defaults)(&spec.params))?;
        (entry.factory)(&params, horizon, schedule_rng)
    }
}

fn periodic_defaults(user: &Params) -> Params {
    let k = user.get("k").unwrap_or(3.0);
    Params::from([("k", k), ("phase", k - 1.0)])
}

fn cadence(p: &Params, owner: &str) -> Result<(usize, usize), ConfigError> {
    let period = as_count(p, owner, "k", 1)?;
    let phase = as_count(p, owner, "phase", 0)?;
    if phase >= period {
        return Err(invalid(owner, "phase", phase as f64, "must be < k"));
    }
    Ok((period, phase))
}
