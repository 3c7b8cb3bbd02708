//! Closed-form moments of the cumulative gain-loss and the positivity
//! thresholds of the return mean.
//!
//! For i.i.d. returns with mean `mu` and variance `sigma^2`, the cumulative
//! gain-loss `G_k = V(k) - v0` has expectation
//!
//! ```text
//! E[G_k] = v0 * (alpha * (1 + w(mu - eps))^k
//!               + (1 - alpha) * (1 - w(mu + eps))^k - 1)
//! ```
//!
//! and a closed-form variance built from the per-period second moments of
//! the long, short, and cross factors. The expectation is strictly convex
//! in both `w` and `mu` for `alpha` in (0, 1) and `k >= 2`, which yields
//! conservative drift thresholds `mu_minus < 0 < mu_plus` beyond which the
//! expected gain is provably positive, and a unique interior minimizer
//! `mu_zero`.

use crate::numeric::pow_int;
use crate::policy::{PolicyParams, ReturnStats};
use serde::{Deserialize, Serialize};
use thiserror::Error;

// Negative closed-form variance beyond this fraction of the largest term
// signals a transcription bug rather than cancellation noise.
const VARIANCE_CANCELLATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("variance expression produced {value}, below the cancellation tolerance {tolerance}")]
    NegativeVariance { value: f64, tolerance: f64 },
}

/// Expected cumulative gain-loss after `k` periods; zero at `k = 0` and for
/// `w = 0`.
pub fn expected_gain(p: &PolicyParams, stats: &ReturnStats, k: usize) -> f64 {
    let long_factor = 1.0 + p.w * (stats.mu - p.eps);
    let short_factor = 1.0 - p.w * (stats.mu + p.eps);
    p.v0
        * (p.alpha * pow_int(long_factor, k as u64)
            + (1.0 - p.alpha) * pow_int(short_factor, k as u64)
            - 1.0)
}

/// Variance of the cumulative gain-loss after `k` periods, scaled by `v0^2`.
///
/// The expression is a six-term combination of `k`-th powers; for small
/// `sigma` and `eps` the terms cancel almost completely, so results within
/// rounding noise of zero are clamped to zero and anything more negative is
/// an error.
pub fn variance_gain(
    p: &PolicyParams,
    stats: &ReturnStats,
    k: usize,
) -> Result<f64, AnalyticsError> {
    let (alpha, w, eps) = (p.alpha, p.w, p.eps);
    let (mu, s2) = (stats.mu, stats.sigma * stats.sigma);
    let k = k as u64;

    let long_factor = 1.0 + w * (mu - eps);
    let short_factor = 1.0 - w * (mu + eps);
    let mean_long = pow_int(long_factor, k);
    let mean_short = pow_int(short_factor, k);
    // Second moments of the per-period factors; the cross moment is
    // E[(1 + w(X - eps)) * (1 - w(X + eps))] = 1 - 2 w eps - w^2 (mu^2 + s2 - eps^2).
    let sq_long = pow_int(long_factor * long_factor + w * w * s2, k);
    let sq_short = pow_int(short_factor * short_factor + w * w * s2, k);
    let cross = pow_int(1.0 - 2.0 * w * eps - w * w * ((mu * mu + s2) - eps * eps), k);

    let mean = alpha * mean_long + (1.0 - alpha) * mean_short - 1.0;
    let terms = [
        alpha * alpha * sq_long,
        (1.0 - alpha) * (1.0 - alpha) * sq_short,
        2.0 * alpha * (1.0 - alpha) * cross,
        -2.0 * alpha * mean_long,
        -2.0 * (1.0 - alpha) * mean_short,
        1.0,
        -mean * mean,
    ];
    let variance: f64 = terms.iter().sum();

    let magnitude = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let tolerance = VARIANCE_CANCELLATION_TOL * magnitude;
    if variance.abs() <= tolerance {
        Ok(0.0)
    } else if variance > 0.0 {
        Ok(p.v0 * p.v0 * variance)
    } else {
        Err(AnalyticsError::NegativeVariance { value: variance, tolerance })
    }
}

fn require_interior_alpha(p: &PolicyParams) -> Result<(), AnalyticsError> {
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        return Err(AnalyticsError::InvalidArgument(format!(
            "critical points require alpha in (0, 1), got {}",
            p.alpha
        )));
    }
    if p.w <= 0.0 {
        return Err(AnalyticsError::InvalidArgument(format!(
            "critical points require w > 0, got {}",
            p.w
        )));
    }
    Ok(())
}

/// Conservative drift thresholds `(mu_minus, mu_plus)` with
/// `mu_minus < 0 < mu_plus`: the expected gain is strictly positive for
/// every `mu > mu_plus` and every `mu < mu_minus`.
///
/// These are the zero crossings of the one-sided lower envelopes
/// `alpha * (1 + w(mu - eps))^k - 1` and `(1 - alpha) * (1 - w(mu + eps))^k - 1`,
///
/// ```text
/// mu_plus  = (alpha^(-1/k) - 1) / w + eps
/// mu_minus = -((1 - alpha)^(-1/k) - 1) / w - eps
/// ```
///
/// so they are sufficient, not exact; both converge to `+/- eps` as
/// `k -> infinity`. Requires `alpha` in (0, 1) and `w > 0`.
pub fn critical_mus(p: &PolicyParams, k: usize) -> Result<(f64, f64), AnalyticsError> {
    require_interior_alpha(p)?;
    if k < 1 {
        return Err(AnalyticsError::InvalidArgument("critical points require k >= 1".into()));
    }
    let kf = k as f64;
    let mu_plus = ((1.0 / p.alpha).ln() / kf).exp_m1() / p.w + p.eps;
    let mu_minus = -(((1.0 / (1.0 - p.alpha)).ln() / kf).exp_m1() / p.w) - p.eps;
    Ok((mu_minus, mu_plus))
}

/// The drift at which the expected gain attains its interior minimum.
///
/// Solving `d/dmu E[G_k] = 0` gives
/// `alpha * (1 + w(mu - eps))^(k-1) = (1 - alpha) * (1 - w(mu + eps))^(k-1)`,
/// which is linear in `mu` once the ratio is isolated:
///
/// ```text
/// mu_zero = (A - 1) * (1 - w * eps) / (w * (A + 1)),
/// A = ((1 - alpha) / alpha)^(1 / (k - 1))
/// ```
///
/// For `alpha = 1/2` this is zero for every `w`, `eps`, `k`; whenever
/// `eps > 0` and `w > 0` the expected gain there is strictly negative.
/// Requires `alpha` in (0, 1), `w > 0`, and `k >= 2`.
pub fn minimizing_mu(p: &PolicyParams, k: usize) -> Result<f64, AnalyticsError> {
    require_interior_alpha(p)?;
    if k < 2 {
        return Err(AnalyticsError::InvalidArgument(
            "the interior minimizer requires k >= 2".into(),
        ));
    }
    let ratio = ((1.0 - p.alpha) / p.alpha).powf(1.0 / (k as f64 - 1.0));
    Ok((ratio - 1.0) * (1.0 - p.w * p.eps) / (p.w * (ratio + 1.0)))
}

/// Second derivative of the expected gain in the decision weight, evaluated
/// at an arbitrary `w` (not necessarily `p.w`):
///
/// ```text
/// v0 * k * (k - 1) * (alpha * (1 + w(mu - eps))^(k-2) * (mu - eps)^2
///                    + (1 - alpha) * (1 - w(mu + eps))^(k-2) * (mu + eps)^2)
/// ```
///
/// Strictly positive on the admissible weight set for `alpha` in (0, 1)
/// unless `mu - eps` and `mu + eps` both vanish. Requires `k >= 2`.
pub fn second_derivative_in_w(p: &PolicyParams, stats: &ReturnStats, k: usize, w: f64) -> f64 {
    assert!(k >= 2, "second derivative requires k >= 2");
    let kf = k as f64;
    let up = stats.mu - p.eps;
    let dn = stats.mu + p.eps;
    p.v0
        * kf
        * (kf - 1.0)
        * (p.alpha * pow_int(1.0 + w * up, (k - 2) as u64) * up * up
            + (1.0 - p.alpha) * pow_int(1.0 - w * dn, (k - 2) as u64) * dn * dn)
}

/// Closed-form summary of the gain-loss distribution for one
/// (policy, return-stats, horizon) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub policy: PolicyParams,
    pub stats: ReturnStats,
    pub k: usize,
    pub expected_gain: f64,
    pub variance: f64,
    pub std: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub mu_zero: f64,
}

impl AnalyticsReport {
    /// Evaluates every closed form at once. The critical points constrain
    /// the inputs: `alpha` in (0, 1), `w > 0`, `k >= 2`.
    pub fn compute(
        p: &PolicyParams,
        stats: &ReturnStats,
        k: usize,
    ) -> Result<Self, AnalyticsError> {
        let variance = variance_gain(p, stats, k)?;
        let (mu_minus, mu_plus) = critical_mus(p, k)?;
        Ok(Self {
            policy: *p,
            stats: *stats,
            k,
            expected_gain: expected_gain(p, stats, k),
            variance,
            std: variance.sqrt(),
            mu_plus,
            mu_minus,
            mu_zero: minimizing_mu(p, k)?,
        })
    }
}
