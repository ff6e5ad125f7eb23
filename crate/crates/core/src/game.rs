//! The T-round audit game: environment parameters, truth process, RNG streams
//! and the interfaces auditees and auditors implement.

use std::collections::BTreeSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, GameError};
use crate::metrics;

/// Environment, detection and population parameters for one play of the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    #[serde(rename = "horizon_T")]
    pub horizon: usize,
    pub m0: f64,
    pub sigma: f64,
    pub n_max: u32,
    pub n_min: u32,
    pub epsilon: f64,
    pub z: f64,
    #[serde(rename = "population_N")]
    pub population: u32,
    pub alpha: f64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            horizon: 12,
            m0: 0.5,
            sigma: 0.02,
            n_max: 1000,
            n_min: 100,
            epsilon: 0.0,
            z: 1.96,
            population: 1000,
            alpha: 0.05,
        }
    }
}

impl GameConfig {
    /// The attrition environment: identical to the default except `m0 = 0.30`.
    pub fn attrition() -> Self {
        Self {
            m0: 0.30,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::InvalidEnv(msg));
        if !(0.0..=1.0).contains(&self.m0) {
            return fail(format!("m0 = {} must lie in [0, 1]", self.m0));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail(format!("sigma = {} must be finite and >= 0", self.sigma));
        }
        if self.n_min == 0 || self.n_min >= self.n_max {
            return fail(format!(
                "need 0 < n_min < n_max, got n_min = {}, n_max = {}",
                self.n_min, self.n_max
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon = {} must be finite and >= 0", self.epsilon));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return fail(format!("z = {} must be finite and > 0", self.z));
        }
        if self.horizon < 2 {
            return fail(format!("horizon_T = {} must be at least 2", self.horizon));
        }
        if self.population < self.n_max {
            return fail(format!(
                "population_N = {} must be >= n_max = {}",
                self.population, self.n_max
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        Ok(())
    }
}

/// Outcome of a single round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub true_metric: f64,
    pub reported_metric: f64,
    pub n_t: u32,
    pub audited: bool,
}

impl RoundRecord {
    pub fn gap(&self) -> f64 {
        self.reported_metric - self.true_metric
    }
}

/// Ordered per-round outcomes of one game, plus the set of rounds actually audited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rounds: Vec<RoundRecord>,
    pub realized_audit_set: Vec<usize>,
}

impl Trajectory {
    pub fn from_rounds(rounds: Vec<RoundRecord>) -> Self {
        let realized_audit_set = rounds.iter().filter(|r| r.audited).map(|r| r.t).collect();
        Self {
            rounds,
            realized_audit_set,
        }
    }

    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn audited(&self) -> impl Iterator<Item = &RoundRecord> {
        self.rounds.iter().filter(|r| r.audited)
    }

    pub fn unaudited(&self) -> impl Iterator<Item = &RoundRecord> {
        self.rounds.iter().filter(|r| !r.audited)
    }
}

/// What both parties learn about an audited round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditObservation {
    pub t: usize,
    pub reported_metric: f64,
    pub verified_metric: f64,
    pub n_t: u32,
    pub flagged: bool,
}

impl AuditObservation {
    pub fn gap(&self) -> f64 {
        self.reported_metric - self.verified_metric
    }
}

/// The auditee's per-round claim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Report {
    pub reported: f64,
    pub n_t: u32,
}

impl Report {
    pub fn new(reported: f64, n_t: u32) -> Self {
        Self { reported, n_t }
    }
}

/// An auditee strategy. Instances are stateful and belong to a single game.
pub trait Auditee: Send {
    fn choose_report(
        &mut self,
        t: usize,
        true_metric: f64,
        history: &[AuditObservation],
        rng: &mut dyn RngCore,
    ) -> Report;
}

/// An auditor policy. Instances are stateful and belong to a single game.
pub trait Auditor: Send {
    /// The audit set disclosed to the auditee at round 0.
    fn committed_schedule(&self) -> &BTreeSet<usize>;

    fn audit_this_round(&mut self, t: usize, horizon: usize, history: &[AuditObservation]) -> bool;

    /// Minimum acceptable reported sample size, for policies with a floor arm.
    fn sample_floor(&self) -> Option<u32> {
        None
    }
}

const ENV_STREAM: u64 = 0x0065_6e76;
const STRATEGY_STREAM: u64 = 0x7374_7261;
const SCHEDULE_STREAM: u64 = 0x7363_6865;

/// Seed offset between consecutive trials' schedule streams.
pub const SCHEDULE_SEED_STRIDE: u64 = 1009;

/// Three independent random sources for one trial.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub env: ChaCha8Rng,
    pub strategy: ChaCha8Rng,
    pub schedule: ChaCha8Rng,
    pub schedule_seed: u64,
}

pub fn make_rng_streams(trial_seed: u64, schedule_seed_base: u64) -> RngStreams {
    let tagged = |seed: u64, tag: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(tag);
        rng
    };
    let schedule_seed = schedule_seed_base.wrapping_add(SCHEDULE_SEED_STRIDE.wrapping_mul(trial_seed));
    RngStreams {
        env: tagged(trial_seed, ENV_STREAM),
        strategy: tagged(trial_seed, STRATEGY_STREAM),
        schedule: tagged(schedule_seed, SCHEDULE_STREAM),
        schedule_seed,
    }
}

/// One step of the clipped random-walk truth process.
pub fn step_truth(prev_m: f64, noise: f64) -> f64 {
    (prev_m + noise).clamp(0.0, 1.0)
}

/// Plays one game. The auditor's schedule must already be committed and
/// disclosed to the auditee. Round 0 uses `m0` as given; truth noise enters
/// from round 1 onward.
pub fn run_game(
    config: &GameConfig,
    auditee: &mut dyn Auditee,
    auditor: &mut dyn Auditor,
    streams: &mut RngStreams,
) -> Result<Trajectory, GameError> {
    let horizon = config.horizon;
    let floor = auditor.sample_floor();
    let mut rounds = Vec::with_capacity(horizon);
    let mut history: Vec<AuditObservation> = Vec::new();
    let mut truth = config.m0;

    for t in 0..horizon {
        if t > 0 {
            let z: f64 = streams.env.sample(StandardNormal);
            truth = step_truth(truth, config.sigma * z);
        }

        let report = auditee.choose_report(t, truth, &history, &mut streams.strategy);
        if !(0.0..=1.0).contains(&report.reported) {
            return Err(GameError::ReportRange {
                t,
                reported: report.reported,
            });
        }
        if report.n_t < 1 || report.n_t > config.population {
            return Err(GameError::SampleSize {
                t,
                n_t: report.n_t,
                population: config.population,
            });
        }

        let audited = auditor.audit_this_round(t, horizon, &history);
        if audited {
            let flagged = metrics::exceeds_threshold(
                report.reported,
                truth,
                report.n_t,
                config.epsilon,
                config.z,
            ) || floor.is_some_and(|f| report.n_t < f);
            history.push(AuditObservation {
                t,
                reported_metric: report.reported,
                verified_metric: truth,
                n_t: report.n_t,
                flagged,
            });
        }

        rounds.push(RoundRecord {
            t,
            true_metric: truth,
            reported_metric: report.reported,
            n_t: report.n_t,
            audited,
        });
    }

    Ok(Trajectory::from_rounds(rounds))
}
