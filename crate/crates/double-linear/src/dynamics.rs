//! Exact per-path evolution of the paired long/short accounts, the control
//! values, and the survivability / cash-financing invariant checks.
//!
//! Per period the long account pays `eps * pi_long` and the short account
//! `eps * |pi_short|` in fees, so with controls `pi_long = w * v_long`,
//! `pi_short = -w * v_short` the update is
//!
//! ```text
//! v_long'  = v_long  + (x - eps) * pi_long
//! v_short' = v_short + (x + eps) * pi_short
//! ```
//!
//! Accumulation is done in this recursive form because backtests need the
//! per-step states; the equivalent product form is used as a cross-check
//! only.

use crate::numeric::pow_int;
use crate::policy::PolicyParams;
use serde::{Deserialize, Serialize};

/// Paired long/short account values at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccountState {
    pub v_long: f64,
    pub v_short: f64,
    pub step: usize,
}

impl AccountState {
    /// Initial split of `v0` into the long and short accounts.
    pub fn initial(p: &PolicyParams) -> Self {
        Self {
            v_long: p.alpha * p.v0,
            v_short: (1.0 - p.alpha) * p.v0,
            step: 0,
        }
    }

    pub fn total(&self) -> f64 {
        self.v_long + self.v_short
    }
}

/// Per-step record of one simulated or backtested path.
///
/// `states`, `controls`, and `gain_loss` all have length `k + 1` for a path
/// of `k` returns; `gain_loss[k]` equals `states[k].total() - v0` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<AccountState>,
    pub controls: Vec<(f64, f64)>,
    pub gain_loss: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &AccountState {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn final_gain_loss(&self) -> f64 {
        *self.gain_loss.last().expect("trajectory has an initial state")
    }
}

/// Double linear control pair `(w * v_long, -w * v_short)`.
pub fn controls(s: &AccountState, p: &PolicyParams) -> (f64, f64) {
    (p.w * s.v_long, -(p.w * s.v_short))
}

/// Classical long/short control law with initial investment `pi0`:
/// `pi_long = pi0 + w * (v_long - v_long(0))` and the mirrored short side.
///
/// With `alpha = 1/2` and `pi0 = w * v0 / 2` this coincides with
/// [`controls`] exactly; the constant offset is grouped so the coincidence
/// holds bit for bit in floating point.
pub fn sls_controls(s: &AccountState, p: &PolicyParams, pi0: f64) -> (f64, f64) {
    let v_long0 = p.alpha * p.v0;
    let v_short0 = (1.0 - p.alpha) * p.v0;
    let offset_long = pi0 - p.w * v_long0;
    let offset_short = p.w * v_short0 - pi0;
    (offset_long + p.w * s.v_long, offset_short - p.w * s.v_short)
}

/// Advances one period under explicit controls.
///
/// The fee signs follow the policy's convention `pi_long >= 0 >= pi_short`,
/// folding `eps * |pi|` into `(x - eps) * pi_long` and
/// `(x + eps) * pi_short`; this reproduces the product form of the account
/// values on every path, including deliberately inadmissible diagnostics.
/// The risk-free rate `r` accrues on the long account only.
fn advance(s: &AccountState, x: f64, eps: f64, r: f64, pi: (f64, f64)) -> AccountState {
    AccountState {
        v_long: (1.0 + r) * s.v_long + (x - eps - r) * pi.0,
        v_short: s.v_short + (x + eps) * pi.1,
        step: s.step + 1,
    }
}

/// One period of the double linear policy with zero risk-free rate.
pub fn step(s: &AccountState, x: f64, p: &PolicyParams) -> AccountState {
    step_with_rate(s, x, p, 0.0)
}

/// One period with a per-period risk-free rate `r >= 0` accruing on the
/// long account. `r = 0` reproduces [`step`].
pub fn step_with_rate(s: &AccountState, x: f64, p: &PolicyParams, r: f64) -> AccountState {
    advance(s, x, p.eps, r, controls(s, p))
}

/// Evolves a full path under an arbitrary control law.
///
/// The law is evaluated at every state, including the final one, so the
/// `controls` sequence has the same length as `states`.
pub fn run_path_with<F>(returns: &[f64], p: &PolicyParams, law: F) -> Trajectory
where
    F: Fn(&AccountState) -> (f64, f64),
{
    let mut states = Vec::with_capacity(returns.len() + 1);
    let mut ctrl = Vec::with_capacity(returns.len() + 1);
    let mut gain_loss = Vec::with_capacity(returns.len() + 1);

    let mut s = AccountState::initial(p);
    states.push(s);
    ctrl.push(law(&s));
    gain_loss.push(s.total() - p.v0);

    for &x in returns {
        let pi = *ctrl.last().expect("control for current state");
        s = advance(&s, x, p.eps, 0.0, pi);
        states.push(s);
        ctrl.push(law(&s));
        gain_loss.push(s.total() - p.v0);
    }

    Trajectory { states, controls: ctrl, gain_loss }
}

/// Evolves a full path under the double linear policy.
///
/// An empty return slice yields the initial state only. The final total
/// equals the product form
/// `v0 * (alpha * prod(1 + w(x_j - eps)) + (1 - alpha) * prod(1 - w(x_j + eps)))`
/// up to floating-point accumulation.
pub fn run_path(returns: &[f64], p: &PolicyParams) -> Trajectory {
    run_path_with(returns, p, |s| controls(s, p))
}

/// Evolves a full path under the classical control law of [`sls_controls`].
pub fn run_path_sls(returns: &[f64], p: &PolicyParams, pi0: f64) -> Trajectory {
    run_path_with(returns, p, |s| sls_controls(s, p, pi0))
}

/// Worst-case total account value after `k` periods:
/// `v0 * (alpha * (1 + w(x_min - eps))^k + (1 - alpha) * (1 - w(x_max + eps))^k)`.
///
/// Strictly positive for admissible policies with `alpha > 0`; every
/// trajectory whose returns stay within the configured bounds satisfies
/// `total(k) >= account_lower_bound(k)`.
pub fn account_lower_bound(k: usize, p: &PolicyParams) -> f64 {
    let long_factor = 1.0 + p.w * (p.bounds.x_min - p.eps);
    let short_factor = 1.0 - p.w * (p.bounds.x_max + p.eps);
    p.v0
        * (p.alpha * pow_int(long_factor, k as u64)
            + (1.0 - p.alpha) * pow_int(short_factor, k as u64))
}

/// One invariant breach, with the step where it occurred.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InvariantViolation {
    /// Total account value not strictly positive (non-negative for `alpha = 0`).
    Bankrupt { step: usize, total: f64 },
    /// Total account value below the worst-case lower bound.
    BelowLowerBound { step: usize, total: f64, bound: f64 },
    /// Net exposure `|pi_long + pi_short|` exceeds the account value.
    NotCashFinanced { step: usize, exposure: f64, total: f64 },
}

/// Outcome of [`check_invariants`] over one trajectory.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InvariantReport {
    pub violations: Vec<InvariantViolation>,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

// Rounding slack for comparisons between two independently accumulated
// quantities that are equal or ordered in exact arithmetic.
const INVARIANT_SLACK: f64 = 1e-9;

/// Verifies survivability, the worst-case lower bound, and cash-financing
/// at every step of a trajectory.
///
/// For `alpha = 0` the whole book is short and the total can touch exactly
/// zero at `x = x_max` with `w = max_weight`, so positivity degrades to
/// non-negativity there. Comparisons carry a relative floating-point slack;
/// the reported numbers are the raw values.
pub fn check_invariants(t: &Trajectory, p: &PolicyParams) -> InvariantReport {
    let mut report = InvariantReport::default();
    for (k, (state, pi)) in t.states.iter().zip(&t.controls).enumerate() {
        let total = state.total();
        let survivable = if p.alpha > 0.0 { total > 0.0 } else { total >= 0.0 };
        if !survivable {
            report.violations.push(InvariantViolation::Bankrupt { step: k, total });
        }
        let bound = account_lower_bound(k, p);
        let slack = INVARIANT_SLACK * p.v0.max(bound.abs());
        if total < bound - slack {
            report
                .violations
                .push(InvariantViolation::BelowLowerBound { step: k, total, bound });
        }
        let exposure = (pi.0 + pi.1).abs();
        if exposure > total + INVARIANT_SLACK * p.v0.max(total.abs()) {
            report
                .violations
                .push(InvariantViolation::NotCashFinanced { step: k, exposure, total });
        }
    }
    report
}

/// Indices of returns that fall outside the policy's configured bounds.
///
/// Out-of-bound returns are reported as warnings rather than errors: the
/// configured support is an assumption, and both historical data and
/// lognormal models can step outside it.
pub fn out_of_bounds(returns: &[f64], p: &PolicyParams) -> Vec<usize> {
    returns
        .iter()
        .enumerate()
        .filter(|(_, &x)| !p.bounds.contains(x))
        .map(|(i, _)| i)
        .collect()
}
