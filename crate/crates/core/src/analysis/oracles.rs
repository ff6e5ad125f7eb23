use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::metrics::detection_threshold;

/// Drift magnitudes `(lower, upper]` that beat the full-sample threshold but
/// hide inside the small-sample one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverRegime {
    pub lower: f64,
    pub upper: f64,
    pub empty: bool,
}

impl CoverRegime {
    pub fn contains(&self, delta: f64) -> bool {
        !self.empty && self.lower < delta && delta <= self.upper
    }
}

pub fn cover_regime(p: f64, n_min: u32, n_max: u32, epsilon: f64, z: f64) -> CoverRegime {
    let lower = detection_threshold(p, n_max, epsilon, z);
    let upper = detection_threshold(p, n_min, epsilon, z);
    CoverRegime {
        lower,
        upper,
        empty: lower >= upper,
    }
}

/// Expected smallest element of a uniform `count`-subset of `{0, .., horizon-1}`.
pub fn expected_min_audited_round(horizon: usize, count: usize) -> Option<f64> {
    if count == 0 || count > horizon {
        return None;
    }
    Some((horizon as f64 + 1.0) / (count as f64 + 1.0) - 1.0)
}

/// `1 - (1 - alpha)^K`: family-wise rate of `K` independent level-alpha tests.
pub fn fwer_bound(alpha: f64, k: usize) -> f64 {
    1.0 - (1.0 - alpha).powi(k as i32)
}

/// `E[max of k iid N(0,1)]` by composite Simpson quadrature of
/// `x k phi(x) Phi(x)^(k-1)` over `[-12, 12]`. Absolute error is below 1e-10
/// for `k <= 1000`.
pub fn expected_max_standard_normal(k: usize) -> f64 {
    if k <= 1 {
        return 0.0;
    }
    let normal = Normal::standard();
    let kf = k as f64;
    let integrand = |x: f64| x * kf * normal.pdf(x) * normal.cdf(x).powi(k as i32 - 1);
    let (a, b, panels) = (-12.0f64, 12.0f64, 24_000usize);
    let h = (b - a) / panels as f64;
    let mut sum = integrand(a) + integrand(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Expected per-round cherry-pick gap: `sigma_pick * E[max of K N(0,1)]`.
pub fn cherry_pick_expected_gap(candidates: usize, sigma_pick: f64) -> f64 {
    sigma_pick * expected_max_standard_normal(candidates)
}
