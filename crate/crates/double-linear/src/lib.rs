//! Simulation and analysis of the double linear long/short trading policy
//! under proportional transaction costs.
//!
//! The policy splits initial capital `v0` into a long account (`alpha * v0`)
//! and a short account (`(1 - alpha) * v0`) and commits a fixed fraction `w`
//! of each account every period, paying a proportional fee `eps` on the
//! traded amount. The crate provides:
//!
//! * [`policy`] — parameter types, the admissible weight set, validation;
//! * [`dynamics`] — exact per-path evolution of the paired accounts,
//!   control values, and survivability / cash-financing checks;
//! * [`analytics`] — closed-form expectation and variance of the cumulative
//!   gain-loss, convexity, and positivity thresholds for the return mean;
//! * [`stochastic`] — seeded i.i.d. return generators (two-point and
//!   geometric Brownian motion with down-jumps) with reproducible
//!   per-stream randomness;
//! * [`montecarlo`] — deterministic parallel Monte-Carlo estimation, the
//!   drift sweep experiment, and an exact path-enumeration oracle;
//! * [`backtest`] — historical close-price ingestion and policy execution
//!   over real data.
//!
//! All randomness flows from explicit [`stochastic::SeedSpec`] values;
//! results are bit-reproducible across runs, platforms, and worker counts.

pub mod analytics;
pub mod backtest;
pub mod dynamics;
pub mod montecarlo;
mod numeric;
pub mod policy;
pub mod stochastic;

pub use analytics::AnalyticsReport;
pub use dynamics::{AccountState, Trajectory};
pub use policy::{PolicyParams, ReturnBounds, ReturnStats};
pub use stochastic::{GbmJumpParams, ReturnModel, SeedSpec, TwoPointModel};
