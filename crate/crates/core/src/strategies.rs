//! Auditee strategies: the honest baselines and five gaming primitives.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::game::{AuditObservation, Auditee, Report};

/// Reports the truth at full sample size.
#[derive(Debug, Clone)]
pub struct HonestAuditee {
    pub n_t: u32,
}

impl Auditee for HonestAuditee {
    fn choose_report(&mut self, _t: usize, m: f64, _: &[AuditObservation], _: &mut dyn RngCore) -> Report {
        Report::new(m, self.n_t)
    }
}

/// Honest reporting with binomial sampling noise: `Binomial(n, m) / n`.
#[derive(Debug, Clone)]
pub struct HonestNoisyAuditee {
    pub n_t: u32,
}

impl HonestNoisyAuditee {
    pub fn report_from_draw(&self, successes: u64) -> Report {
        Report::new(successes as f64 / f64::from(self.n_t), self.n_t)
    }
}

impl Auditee for HonestNoisyAuditee {
    fn choose_report(&mut self, _t: usize, m: f64, _: &[AuditObservation], rng: &mut dyn RngCore) -> Report {
        let dist = Binomial::new(u64::from(self.n_t), m.clamp(0.0, 1.0)).expect("p in [0, 1]");
        self.report_from_draw(dist.sample(rng))
    }
}

/// Reports the truth from `lag` rounds earlier. Before enough history exists
/// it reports the current truth.
#[derive(Debug, Clone)]
pub struct DelayStrategy {
    pub lag: usize,
    pub n_max: u32,
    buffer: Vec<f64>,
}

impl DelayStrategy {
    pub fn new(lag: usize, n_max: u32) -> Self {
        Self {
            lag,
            n_max,
            buffer: Vec::new(),
        }
    }
}

impl Auditee for DelayStrategy {
    fn choose_report(&mut self, t: usize, m: f64, _: &[AuditObservation], _: &mut dyn RngCore) -> Report {
        debug_assert_eq!(self.buffer.len(), t);
        let reported = if t >= self.lag { self.buffer[t - self.lag] } else { m };
        self.buffer.push(m);
        Report::new(reported, self.n_max)
    }
}

/// Adds a fixed bias to every report.
#[derive(Debug, Clone)]
pub struct DriftStrategy {
    pub delta: f64,
    pub n_max: u32,
}

impl Auditee for DriftStrategy {
    fn choose_report(&mut self, _t: usize, m: f64, _: &[AuditObservation], _: &mut dyn RngCore) -> Report {
        Report::new((m + self.delta).clamp(0.0, 1.0), self.n_max)
    }
}

/// Draws `candidates` estimates from `N(m, sigma_pick^2)` and reports the largest.
#[derive(Debug, Clone)]
pub struct CherryPickStrategy {
    pub candidates: usize,
    pub sigma_pick: f64,
    pub n_max: u32,
}

impl CherryPickStrategy {
    /// Reported value given the standard-normal draws for this round.
    pub fn report_from_draws(&self, m: f64, draws: &[f64]) -> Report {
        let best = draws
            .iter()
            .map(|z| m + self.sigma_pick * z)
            .fold(f64::NEG_INFINITY, f64::max);
        Report::new(best.clamp(0.0, 1.0), self.n_max)
    }
}

impl Auditee for CherryPickStrategy {
    fn choose_report(&mut self, _t: usize, m: f64, _: &[AuditObservation], rng: &mut dyn RngCore) -> Report {
        let draws: Vec<f64> = (0..self.candidates).map(|_| rng.sample(StandardNormal)).collect();
        self.report_from_draws(m, &draws)
    }
}

/// Below `tau`, shrinks to `n_min` and covers a `delta_cover` drift inside the
/// wider noise band.
#[derive(Debug, Clone)]
pub struct AttritionStrategy {
    pub tau: f64,
    pub delta_cover: f64,
    pub n_max: u32,
    pub n_min: u32,
}

impl Auditee for AttritionStrategy {
    fn choose_report(&mut self, _t: usize, m: f64, _: &[AuditObservation], _: &mut dyn RngCore) -> Report {
        if m < self.tau {
            Report::new((m + self.delta_cover).clamp(0.0, 1.0), self.n_min)
        } else {
            Report::new(m, self.n_max)
        }
    }
}

/// Honest on the disclosed audit rounds, drifting by `delta` everywhere else.
#[derive(Debug, Clone)]
pub struct OffAuditDriftStrategy {
    pub delta: f64,
    pub n_max: u32,
    pub committed: BTreeSet<usize>,
}

impl Auditee for OffAuditDriftStrategy {
    fn choose_report(&mut self, t: usize, m: f64, _: &[AuditObservation], _: &mut dyn RngCore) -> Report {
        if self.committed.contains(&t) {
            Report::new(m, self.n_max)
        } else {
            Report::new((m + self.delta).clamp(0.0, 1.0), self.n_max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn report(s: &mut dyn Auditee, t: usize, m: f64) -> Report {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        s.choose_report(t, m, &[], &mut rng)
    }

    #[test]
    fn honest_is_identity() {
        let mut s = HonestAuditee { n_t: 1000 };
        assert_eq!(report(&mut s, 0, 0.5), Report::new(0.5, 1000));
        assert_eq!(report(&mut s, 7, 0.283), Report::new(0.283, 1000));
    }

    #[test]
    fn honest_noisy_degenerate_cases() {
        let mut s = HonestNoisyAuditee { n_t: 1000 };
        assert_eq!(report(&mut s, 3, 0.0), Report::new(0.0, 1000));
        assert_eq!(report(&mut s, 3, 1.0), Report::new(1.0, 1000));
        assert_eq!(s.report_from_draw(517), Report::new(0.517, 1000));
    }

    #[test]
    fn delay_warm_up_and_lag() {
        let mut s = DelayStrategy::new(2, 1000);
        let truths = [0.5, 0.52, 0.49, 0.47, 0.5, 0.53];
        let reports: Vec<f64> = truths
            .iter()
            .enumerate()
            .map(|(t, &m)| report(&mut s, t, m).reported)
            .collect();
        assert_eq!(&reports[..2], &truths[..2]);
        assert_eq!(reports[2], 0.5);
        assert_eq!(reports[5], 0.47);
    }

    #[test]
    fn drift_adds_and_clips() {
        let mut s = DriftStrategy { delta: 0.05, n_max: 1000 };
        assert!((report(&mut s, 0, 0.5).reported - 0.55).abs() < 1e-15);
        assert_eq!(report(&mut s, 0, 0.98), Report::new(1.0, 1000));
    }

    #[test]
    fn cherry_pick_degenerate() {
        let s = CherryPickStrategy { candidates: 1, sigma_pick: 0.0, n_max: 1000 };
        assert_eq!(s.report_from_draws(0.42, &[1.3]), Report::new(0.42, 1000));
        let s = CherryPickStrategy { candidates: 3, sigma_pick: 0.1, n_max: 1000 };
        let r = s.report_from_draws(0.5, &[-1.0, 2.0, 0.5]);
        assert!((r.reported - 0.7).abs() < 1e-12);
        assert_eq!(s.report_from_draws(0.95, &[1.0]).reported, 1.0);
    }

    #[test]
    fn attrition_branches() {
        let mut s = AttritionStrategy { tau: 0.4, delta_cover: 0.05, n_max: 1000, n_min: 100 };
        let r = report(&mut s, 0, 0.30);
        assert!((r.reported - 0.35).abs() < 1e-12);
        assert_eq!(r.n_t, 100);
        assert_eq!(report(&mut s, 0, 0.45), Report::new(0.45, 1000));
        assert_eq!(report(&mut s, 0, 0.40), Report::new(0.40, 1000));
    }

    #[test]
    fn off_audit_drift_respects_committed_set() {
        let mut s = OffAuditDriftStrategy {
            delta: 0.05,
            n_max: 1000,
            committed: [2, 5, 8, 11].into_iter().collect(),
        };
        assert_eq!(report(&mut s, 5, 0.5), Report::new(0.5, 1000));
        assert!((report(&mut s, 6, 0.5).reported - 0.55).abs() < 1e-15);
    }
}
