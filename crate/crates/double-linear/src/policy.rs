//! Policy parameters, the admissible weight set, and validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard bounds on the per-period return support.
///
/// Admissibility of a weight depends only on `x_max` (and the cost rate);
/// `x_min` enters the worst-case account lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnBounds {
    /// Worst-case per-period return, in (-1, 0).
    pub x_min: f64,
    /// Best-case per-period return, in (0, inf).
    pub x_max: f64,
}

impl ReturnBounds {
    pub fn new(x_min: f64, x_max: f64) -> Result<Self, PolicyError> {
        let b = Self { x_min, x_max };
        let violations = b.violations();
        if violations.is_empty() {
            Ok(b)
        } else {
            Err(PolicyError::Invalid(violations))
        }
    }

    /// Both endpoints are part of the admissible support (closed interval).
    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.x_min > -1.0 && self.x_min < 0.0) {
            v.push(Violation::XMinRange(self.x_min));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            v.push(Violation::XMaxRange(self.x_max));
        }
        v
    }
}

/// Per-period return mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    /// Mean per-period return, > -1.
    pub mu: f64,
    /// Standard deviation of the per-period return, >= 0.
    pub sigma: f64,
}

/// One trading configuration of the double linear policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Allocation constant: fraction of `v0` assigned to the long account, in [0, 1].
    pub alpha: f64,
    /// Decision weight: fraction of each account committed per period, in [0, max_weight].
    pub w: f64,
    /// Proportional transaction-cost rate charged on the traded amount, in [0, 1].
    pub eps: f64,
    /// Initial account value, > 0.
    pub v0: f64,
    /// Return support bounds the policy is admissible against.
    pub bounds: ReturnBounds,
}

impl PolicyParams {
    /// Builds and validates a policy in one step.
    pub fn new(
        alpha: f64,
        w: f64,
        eps: f64,
        v0: f64,
        bounds: ReturnBounds,
    ) -> Result<Self, PolicyError> {
        let p = Self { alpha, w, eps, v0, bounds };
        p.validate()?;
        Ok(p)
    }

    /// Checks every admissibility condition and reports all violations at once.
    pub fn validate(&self) -> Result<(), PolicyError> {
        let mut v = Vec::new();
        for (name, value) in [
            ("alpha", self.alpha),
            ("w", self.w),
            ("eps", self.eps),
            ("v0", self.v0),
            ("x_min", self.bounds.x_min),
            ("x_max", self.bounds.x_max),
        ] {
            if !value.is_finite() {
                v.push(Violation::NonFinite(name));
            }
        }
        if v.is_empty() {
            if !(0.0..=1.0).contains(&self.alpha) {
                v.push(Violation::AlphaRange(self.alpha));
            }
            if !(0.0..=1.0).contains(&self.eps) {
                v.push(Violation::EpsRange(self.eps));
            }
            if self.v0 <= 0.0 {
                v.push(Violation::InitialValue(self.v0));
            }
            v.extend(self.bounds.violations());
            // The weight bound is only meaningful once eps and x_max are valid.
            if v.is_empty() {
                let w_max = max_weight(self.eps, self.bounds.x_max)?;
                if !(0.0..=w_max).contains(&self.w) {
                    v.push(Violation::WeightRange { got: self.w, max: w_max });
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(PolicyError::Invalid(v))
        }
    }

    /// Largest admissible decision weight for this policy's cost rate and bounds.
    pub fn max_weight(&self) -> Result<f64, PolicyError> {
        max_weight(self.eps, self.bounds.x_max)
    }
}

/// Largest decision weight that keeps every trade survivable and cash-financed:
/// `min(1 / (1 + eps), 1 / (x_max + eps))`, always in (0, 1].
pub fn max_weight(eps: f64, x_max: f64) -> Result<f64, PolicyError> {
    if !eps.is_finite() || !(0.0..=1.0).contains(&eps) {
        return Err(PolicyError::InvalidArgument(format!(
            "eps must be a finite value in [0, 1], got {eps}"
        )));
    }
    if !x_max.is_finite() || x_max <= 0.0 {
        return Err(PolicyError::InvalidArgument(format!(
            "x_max must be a finite value > 0, got {x_max}"
        )));
    }
    Ok((1.0 / (1.0 + eps)).min(1.0 / (x_max + eps)))
}

/// A single violated admissibility condition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("alpha = {0} is outside [0, 1]")]
    AlphaRange(f64),
    #[error("w = {got} is outside [0, {max}]")]
    WeightRange { got: f64, max: f64 },
    #[error("eps = {0} is outside [0, 1]")]
    EpsRange(f64),
    #[error("v0 = {0} is not strictly positive")]
    InitialValue(f64),
    #[error("x_min = {0} is outside (-1, 0)")]
    XMinRange(f64),
    #[error("x_max = {0} is not a finite value > 0")]
    XMaxRange(f64),
    #[error("{0} is not finite")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid policy: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

impl PolicyError {
    /// The violations carried by a rejection, if any.
    pub fn violations(&self) -> &[Violation] {
        match self {
            PolicyError::Invalid(v) => v,
            PolicyError::InvalidArgument(_) => &[],
        }
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
