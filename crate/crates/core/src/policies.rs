//! Auditor policies: three static temporal-coverage schedules plus the two
//! adaptive baselines (sample-size floor, suspicion escalation).

use std::collections::BTreeSet;

use rand::RngCore;

use crate::error::ConfigError;
use crate::game::{AuditObservation, Auditor};

fn schedule_error(owner: &str, msg: String) -> ConfigError {
    ConfigError::InvalidSweep(format!("{owner}: {msg}"))
}

pub fn one_shot_schedule(t_star: usize, horizon: usize) -> Result<BTreeSet<usize>, ConfigError> {
    if t_star >= horizon {
        return Err(schedule_error("one_shot", format!("t_star = {t_star} must be < T = {horizon}")));
    }
    Ok(BTreeSet::from([t_star]))
}

/// `{t : t mod period == phase}` over the horizon.
pub fn periodic_schedule(period: usize, phase: usize, horizon: usize) -> Result<BTreeSet<usize>, ConfigError> {
    if period == 0 {
        return Err(schedule_error("periodic", "period must be >= 1".into()));
    }
    let set: BTreeSet<usize> = (0..horizon).filter(|t| t % period == phase).collect();
    if set.is_empty() {
        return Err(schedule_error(
            "periodic",
            format!("period {period} with phase {phase} audits nothing in T = {horizon}"),
        ));
    }
    Ok(set)
}

/// `count` distinct rounds drawn uniformly without replacement.
pub fn scheduled_random_schedule(
    count: usize,
    horizon: usize,
    rng: &mut dyn RngCore,
) -> Result<BTreeSet<usize>, ConfigError> {
    if count == 0 || count > horizon {
        return Err(schedule_error(
            "scheduled_random",
            format!("K = {count} must lie in [1, T = {horizon}]"),
        ));
    }
    Ok(rand::seq::index::sample(rng, horizon, count).into_iter().collect())
}

/// `{base, 2 base, ...}` strictly inside the horizon.
pub fn base_cadence_schedule(base_period: usize, horizon: usize) -> Result<BTreeSet<usize>, ConfigError> {
    if base_period == 0 {
        return Err(schedule_error("suspicion_escalation", "base_period must be >= 1".into()));
    }
    let set: BTreeSet<usize> = (1..).map(|i| i * base_period).take_while(|&t| t < horizon).collect();
    if set.is_empty() {
        return Err(schedule_error(
            "suspicion_escalation",
            format!("base_period {base_period} audits nothing in T = {horizon}"),
        ));
    }
    Ok(set)
}

/// Strict: a report exactly at the floor passes.
pub fn floor_violation(n_t: u32, n_floor: u32) -> bool {
    n_t < n_floor
}

/// A fixed audit set committed at round 0; history is ignored.
#[derive(Debug, Clone)]
pub struct StaticPolicy {
    schedule: BTreeSet<usize>,
    floor: Option<u32>,
}

impl StaticPolicy {
    pub fn new(schedule: BTreeSet<usize>) -> Self {
        Self { schedule, floor: None }
    }

    pub fn one_shot(t_star: usize, horizon: usize) -> Result<Self, ConfigError> {
        one_shot_schedule(t_star, horizon).map(Self::new)
    }

    pub fn periodic(period: usize, phase: usize, horizon: usize) -> Result<Self, ConfigError> {
        periodic_schedule(period, phase, horizon).map(Self::new)
    }

    pub fn scheduled_random(count: usize, horizon: usize, rng: &mut dyn RngCore) -> Result<Self, ConfigError> {
        scheduled_random_schedule(count, horizon, rng).map(Self::new)
    }

    /// Periodic cadence plus a sample-size floor applied on audited rounds.
    pub fn min_sample_floor(period: usize, phase: usize, n_floor: u32, horizon: usize) -> Result<Self, ConfigError> {
        Ok(Self {
            floor: Some(n_floor),
            ..Self::periodic(period, phase, horizon)?
        })
    }
}

impl Auditor for StaticPolicy {
    fn committed_schedule(&self) -> &BTreeSet<usize> {
        &self.schedule
    }

    fn audit_this_round(&mut self, t: usize, _horizon: usize, _history: &[AuditObservation]) -> bool {
        self.schedule.contains(&t)
    }

    fn sample_floor(&self) -> Option<u32> {
        self.floor
    }
}

/// Audits on a base cadence until some audit observes `|gap| > threshold`,
/// then audits every later round. Never de-escalates.
#[derive(Debug, Clone)]
pub struct SuspicionEscalationPolicy {
    base: BTreeSet<usize>,
    threshold: f64,
    escalated: bool,
}

impl SuspicionEscalationPolicy {
    pub fn new(base_period: usize, threshold: f64, horizon: usize) -> Result<Self, ConfigError> {
        Ok(Self {
            base: base_cadence_schedule(base_period, horizon)?,
            threshold,
            escalated: false,
        })
    }

    pub fn is_escalated(&self) -> bool {
        self.escalated
    }
}

impl Auditor for SuspicionEscalationPolicy {
    /// Only the base cadence is disclosed.
    fn committed_schedule(&self) -> &BTreeSet<usize> {
        &self.base
    }

    fn audit_this_round(&mut self, t: usize, _horizon: usize, history: &[AuditObservation]) -> bool {
        if !self.escalated {
            self.escalated = history.iter().any(|o| o.gap().abs() > self.threshold);
        }
        self.escalated || self.base.contains(&t)
    }
}
