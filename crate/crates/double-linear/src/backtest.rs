//! Historical close-price ingestion and policy execution over real data.
//!
//! Input files are UTF-8 CSV with header `date,close`, one row per trading
//! day, ISO-8601 dates, `.` decimal separator. Missing calendar days are
//! not gap-filled; returns are computed between consecutive available rows.

use crate::dynamics::{self, run_path, InvariantReport, Trajectory};
use crate::policy::{PolicyError, PolicyParams};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, BufReader, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("account invariants violated during backtest: {0:?}")]
    Invariants(InvariantReport),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Daily close prices with strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

/// Sample statistics of a return series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSummary {
    pub sample_mean: f64,
    /// Sample standard deviation with the n-1 denominator.
    pub sample_std: f64,
    pub x_max_observed: f64,
    pub x_min_observed: f64,
    pub n_returns: usize,
}

/// Parses and validates a `date,close` CSV stream.
pub fn load_prices<R: Read>(source: R) -> Result<PriceSeries, BacktestError> {
    let reader = BufReader::new(source);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(BacktestError::Validation("empty input".into())),
    };
    if header.trim_end_matches('\r') != "date,close" {
        return Err(BacktestError::Parse {
            line: 1,
            msg: format!("expected header `date,close`, got `{header}`"),
        });
    }

    let mut dates = Vec::new();
    let mut closes = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let row = line.trim_end_matches('\r');
        if row.is_empty() {
            continue;
        }
        let (date_str, close_str) = row.split_once(',').ok_or_else(|| BacktestError::Parse {
            line: line_no,
            msg: format!("expected `date,close`, got `{row}`"),
        })?;
        let date: NaiveDate = date_str.parse().map_err(|e| BacktestError::Parse {
            line: line_no,
            msg: format!("bad date `{date_str}`: {e}"),
        })?;
        let close: f64 = close_str.parse().map_err(|e| BacktestError::Parse {
            line: line_no,
            msg: format!("bad close `{close_str}`: {e}"),
        })?;
        if !close.is_finite() || close <= 0.0 {
            return Err(BacktestError::Validation(format!(
                "line {line_no}: close {close} is not strictly positive"
            )));
        }
        if let Some(&prev) = dates.last() {
            if date <= prev {
                return Err(BacktestError::Validation(format!(
                    "line {line_no}: date {date} does not increase over {prev}"
                )));
            }
        }
        dates.push(date);
        closes.push(close);
    }

    if closes.len() < 2 {
        return Err(BacktestError::Validation(format!(
            "need at least 2 rows, got {}",
            closes.len()
        )));
    }
    Ok(PriceSeries { dates, closes })
}

/// Per-period returns `(S(k+1) - S(k)) / S(k)`; positive prices keep every
/// element above -1.
pub fn to_returns(series: &PriceSeries) -> Vec<f64> {
    series
        .closes
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0])
        .collect()
}

/// Sample mean, standard deviation, and observed extrema of a return series.
pub fn summarize(returns: &[f64]) -> Result<ReturnSummary, BacktestError> {
    if returns.len() < 2 {
        return Err(BacktestError::Validation(format!(
            "need at least 2 returns to summarize, got {}",
            returns.len()
        )));
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let ss: f64 = returns.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok(ReturnSummary {
        sample_mean: mean,
        sample_std: (ss / (n - 1.0)).sqrt(),
        x_max_observed: returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        x_min_observed: returns.iter().cloned().fold(f64::INFINITY, f64::min),
        n_returns: returns.len(),
    })
}

/// Result of one policy execution over a price series.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestRun {
    pub trajectory: Trajectory,
    pub summary: ReturnSummary,
    /// Indices of returns outside the policy's configured bounds
    /// (warnings, not errors).
    pub out_of_bounds: Vec<usize>,
}

/// Executes the policy over the series. The policy is validated against its
/// configured bounds before any simulation, and the resulting trajectory
/// must pass every account invariant.
pub fn run_backtest(series: &PriceSeries, p: &PolicyParams) -> Result<BacktestRun, BacktestError> {
    p.validate()?;
    let returns = to_returns(series);
    let summary = summarize(&returns)?;
    let trajectory = run_path(&returns, p);
    let report = dynamics::check_invariants(&trajectory, p);
    if !report.is_clean() {
        return Err(BacktestError::Invariants(report));
    }
    let out_of_bounds = dynamics::out_of_bounds(&returns, p);
    Ok(BacktestRun { trajectory, summary, out_of_bounds })
}

/// Writes a trajectory as CSV with header
/// `step,date,v_long,v_short,v_total,gain_loss,pi_long,pi_short` and all
/// numeric fields at 17 significant digits, so every value round-trips.
pub fn write_trajectory_csv<W: Write>(
    mut out: W,
    t: &Trajectory,
    dates: &[NaiveDate],
) -> Result<(), BacktestError> {
    if dates.len() != t.len() {
        return Err(BacktestError::Validation(format!(
            "{} dates for {} trajectory steps",
            dates.len(),
            t.len()
        )));
    }
    writeln!(out, "step,date,v_long,v_short,v_total,gain_loss,pi_long,pi_short")?;
    for (k, ((state, pi), gain)) in t.states.iter().zip(&t.controls).zip(&t.gain_loss).enumerate()
    {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            k,
            dates[k],
            state.v_long,
            state.v_short,
            state.total(),
            gain,
            pi.0,
            pi.1,
        )?;
    }
    Ok(())
}
