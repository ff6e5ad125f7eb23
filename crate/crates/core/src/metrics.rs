//! Noise-aware detection rule, time-to-detection, gaming gap and the
//! welfare/coverage harm pair.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::game::{GameConfig, Trajectory};

/// Per-seed metric bundle for one (strategy, policy) trial.
///
/// `W` and `C` measure disjoint populations and are never summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub gap: f64,
    pub tau_d_uncorr: usize,
    pub tau_d_bonf: usize,
    #[serde(rename = "W")]
    pub welfare: f64,
    #[serde(rename = "C")]
    pub coverage: f64,
    #[serde(rename = "realized_K")]
    pub realized_k: usize,
}

/// Wald acceptance half-width around a reported proportion:
/// `epsilon + z * sqrt(p (1 - p) / n)` with `p` clipped to `[0, 1]`.
pub fn detection_threshold(reported_p: f64, n: u32, epsilon: f64, z: f64) -> f64 {
    let p = reported_p.clamp(0.0, 1.0);
    let se = (p * (1.0 - p) / f64::from(n.max(1))).sqrt();
    epsilon + z * se
}

/// Strict comparison: a gap equal to the threshold is not flagged.
pub fn exceeds_threshold(reported: f64, verified: f64, n: u32, epsilon: f64, z: f64) -> bool {
    (reported - verified).abs() > detection_threshold(reported, n, epsilon, z)
}

/// Standard-normal quantile at `p`.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `Phi^-1(1 - alpha / 2K)`. `None` when no rounds were audited.
pub fn bonferroni_z(k: usize, alpha: f64) -> Option<f64> {
    if k == 0 || !(alpha > 0.0 && alpha < 1.0) {
        return None;
    }
    Some(normal_quantile(1.0 - alpha / (2.0 * k as f64)))
}

/// First audited round whose gap exceeds the threshold at `z`, or whose
/// reported sample size falls under `floor`. Returns the horizon if none.
pub fn time_to_detection(trajectory: &Trajectory, floor: Option<u32>, epsilon: f64, z: f64) -> usize {
    trajectory
        .audited()
        .find(|r| {
            floor.is_some_and(|f| r.n_t < f)
                || exceeds_threshold(r.reported_metric, r.true_metric, r.n_t, epsilon, z)
        })
        .map_or(trajectory.horizon(), |r| r.t)
}

/// Mean signed gap over audited rounds; 0 when nothing was audited.
pub fn gaming_gap(trajectory: &Trajectory) -> f64 {
    let (sum, count) = trajectory
        .audited()
        .fold((0.0, 0usize), |(s, c), r| (s + r.gap(), c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// `sum over unaudited t of n_t * |gap_t|`.
pub fn welfare_loss(trajectory: &Trajectory) -> f64 {
    trajectory
        .unaudited()
        .map(|r| f64::from(r.n_t) * r.gap().abs())
        .sum()
}

/// `sum over all t of (N - n_t) * |gap_t|`.
pub fn coverage_loss(trajectory: &Trajectory, population: u32) -> f64 {
    trajectory
        .rounds
        .iter()
        .map(|r| f64::from(population.saturating_sub(r.n_t)) * r.gap().abs())
        .sum()
}

/// Computes every metric for a finished trajectory. The Bonferroni variant
/// uses the realized audit count.
pub fn cell_metrics(trajectory: &Trajectory, config: &GameConfig, floor: Option<u32>) -> CellMetrics {
    let realized_k = trajectory.realized_audit_set.len();
    let tau_d_uncorr = time_to_detection(trajectory, floor, config.epsilon, config.z);
    let tau_d_bonf = match bonferroni_z(realized_k, config.alpha) {
        Some(z) => time_to_detection(trajectory, floor, config.epsilon, z),
        None => trajectory.horizon(),
    };
    CellMetrics {
        gap: gaming_gap(trajectory),
        tau_d_uncorr,
        tau_d_bonf,
        welfare: welfare_loss(trajectory),
        coverage: coverage_loss(trajectory, config.population),
        realized_k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::RoundRecord;

    fn trajectory(rows: &[(f64, f64, u32, bool)]) -> Trajectory {
        Trajectory::from_rounds(
            rows.iter()
                .enumerate()
                .map(|(t, &(m, r, n, a))| RoundRecord {
                    t,
                    true_metric: m,
                    reported_metric: r,
                    n_t: n,
                    audited: a,
                })
                .collect(),
        )
    }

    #[test]
    fn threshold_anchors() {
        assert!((detection_threshold(0.5, 1000, 0.0, 1.96) - 0.0310).abs() < 5e-4);
        assert!((detection_threshold(0.5, 100, 0.0, 1.96) - 0.0980).abs() < 5e-4);
        assert_eq!(detection_threshold(0.0, 37, 0.0, 1.96), 0.0);
        assert_eq!(detection_threshold(1.0, 37, 0.0, 1.96), 0.0);
        assert_eq!(detection_threshold(-0.3, 10, 0.01, 1.96), 0.01);
        assert!((detection_threshold(0.5, 1000, 0.05, 1.96) - 0.0810).abs() < 5e-4);
    }

    #[test]
    fn equality_does_not_flag() {
        // gap exactly equal to a zero threshold
        assert!(!exceeds_threshold(0.0, 0.0, 100, 0.0, 1.96));
        assert!(!exceeds_threshold(0.5, 0.25, 100, 0.25, 0.0));
        assert!(exceeds_threshold(1.0, 0.99, 100, 0.0, 1.96));
    }

    #[test]
    fn bonferroni_reduces_to_uncorrected_at_one() {
        assert!((bonferroni_z(1, 0.05).unwrap() - 1.959964).abs() < 1e-5);
        assert!((bonferroni_z(4, 0.05).unwrap() - 2.497705).abs() < 1e-5);
        assert!(bonferroni_z(0, 0.05).is_none());
        assert!(bonferroni_z(3, 0.0).is_none());
    }

    #[test]
    fn k9_bonferroni_still_catches_drift() {
        let z = bonferroni_z(9, 0.05).unwrap();
        assert!((z - 2.772921).abs() < 1e-5);
        assert!(detection_threshold(0.55, 1000, 0.0, z) < 0.05);
    }

    #[test]
    fn metrics_on_hand_built_trajectory() {
        let traj = trajectory(&[
            (0.5, 0.55, 1000, false),
            (0.5, 0.55, 1000, false),
            (0.5, 0.55, 1000, true),
            (0.4, 0.45, 100, false),
            (0.4, 0.40, 1000, true),
        ]);
        assert!((gaming_gap(&traj) - 0.025).abs() < 1e-12);
        assert!((welfare_loss(&traj) - (50.0 + 50.0 + 5.0)).abs() < 1e-9);
        assert!((coverage_loss(&traj, 1000) - 900.0 * 0.05).abs() < 1e-9);
        assert_eq!(time_to_detection(&traj, None, 0.0, 1.96), 2);
        assert_eq!(time_to_detection(&traj, None, 0.05, 1.96), 5);
    }

    #[test]
    fn floor_arm_is_z_independent() {
        let traj = trajectory(&[(0.3, 0.35, 1000, false), (0.3, 0.35, 100, true), (0.3, 0.3, 1000, false)]);
        assert_eq!(time_to_detection(&traj, None, 0.0, 1.96), 3);
        assert_eq!(time_to_detection(&traj, Some(500), 0.0, 1.96), 1);
        assert_eq!(time_to_detection(&traj, Some(500), 0.0, 100.0), 1);
        assert_eq!(time_to_detection(&traj, Some(100), 0.0, 1.96), 3);
    }

    #[test]
    fn empty_audit_set() {
        let traj = trajectory(&[(0.5, 0.6, 1000, false), (0.5, 0.6, 1000, false)]);
        let m = cell_metrics(&traj, &GameConfig { horizon: 2, ..Default::default() }, None);
        assert_eq!(m.gap, 0.0);
        assert_eq!((m.tau_d_uncorr, m.tau_d_bonf, m.realized_k), (2, 2, 0));
    }
}
