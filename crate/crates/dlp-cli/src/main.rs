//! `dlp` — batch CLI for the double linear trading policy.
//!
//! Subcommands: `analytics` (closed forms), `montecarlo` (seeded estimate),
//! `sweep` (annualized-drift experiment), `backtest` (historical prices).
//! All randomness flows from the required `--seed`; identical invocations
//! produce byte-identical output on any machine and worker count.
//!
//! Exit codes: 0 success, 2 usage or validation error, 1 internal error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use double_linear::analytics::{
    critical_mus, expected_gain, minimizing_mu, variance_gain, AnalyticsError,
};
use double_linear::backtest::{
    load_prices, run_backtest, summarize, to_returns, write_trajectory_csv, BacktestError,
};
use double_linear::montecarlo::{estimate, sweep, McError, SweepConfig, SweepRow};
use double_linear::policy::{PolicyError, PolicyParams, ReturnBounds, ReturnStats};
use double_linear::stochastic::{
    GbmJumpParams, ModelError, ReturnModel, SeedSpec, TwoPointModel,
};
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "dlp", version, about = "Double linear long/short trading policy toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form expectation, variance, and drift thresholds of the
    /// cumulative gain-loss.
    Analytics(AnalyticsArgs),
    /// Seeded Monte-Carlo estimate of the gain-loss distribution.
    Montecarlo(MontecarloArgs),
    /// Annualized-drift sweep: Monte-Carlo versus closed forms per grid point.
    Sweep(SweepArgs),
    /// Execute the policy over a historical close-price CSV.
    Backtest(BacktestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Rates accept either decimals (`0.0001`) or a percent suffix (`0.01%`);
/// everything downstream works in decimals.
fn parse_rate(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some(pct) = s.strip_suffix('%') {
        pct.trim()
            .parse::<f64>()
            .map(|v| v / 100.0)
            .map_err(|e| format!("bad percentage `{s}`: {e}"))
    } else {
        s.parse::<f64>().map_err(|e| format!("bad rate `{s}`: {e}"))
    }
}

fn parse_alpha_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|tok| tok.trim().parse::<f64>().map_err(|e| format!("bad alpha `{tok}`: {e}")))
        .collect()
}

#[derive(Args)]
struct PolicyFlags {
    /// Allocation constant: fraction of capital in the long account.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Decision weight committed per period.
    #[arg(long, short)]
    w: f64,
    /// Proportional transaction-cost rate (decimal or `x%`).
    #[arg(long, value_parser = parse_rate, default_value = "0")]
    eps: f64,
    /// Initial account value.
    #[arg(long, default_value_t = 1.0)]
    v0: f64,
    /// Configured worst-case per-period return.
    #[arg(long, default_value_t = -0.95, allow_hyphen_values = true)]
    x_min: f64,
    /// Configured best-case per-period return.
    #[arg(long, default_value_t = 1.0)]
    x_max: f64,
}

impl PolicyFlags {
    fn build(&self) -> Result<PolicyParams, CliError> {
        let bounds = ReturnBounds { x_min: self.x_min, x_max: self.x_max };
        Ok(PolicyParams::new(self.alpha, self.w, self.eps, self.v0, bounds)?)
    }
}

#[derive(Args)]
struct AnalyticsArgs {
    #[command(flatten)]
    policy: PolicyFlags,
    /// Mean per-period return (decimal or `x%`).
    #[arg(long, value_parser = parse_rate, allow_hyphen_values = true)]
    mu: f64,
    /// Standard deviation of the per-period return (decimal or `x%`).
    #[arg(long, value_parser = parse_rate, default_value = "0")]
    sigma: f64,
    /// Horizon in periods.
    #[arg(long, short)]
    k: usize,
    /// Fail (exit 2) if the drift thresholds are undefined for these
    /// parameters instead of emitting nulls.
    #[arg(long)]
    critical_points: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    TwoPoint,
    GbmJump,
}

#[derive(Args)]
struct MontecarloArgs {
    #[command(flatten)]
    policy: PolicyFlags,
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Two-point up return.
    #[arg(long, default_value_t = 0.1)]
    up: f64,
    /// Two-point down return.
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    down: f64,
    /// Two-point probability of the up return.
    #[arg(long, default_value_t = 0.5)]
    p_up: f64,
    /// Annualized drift of the jump-diffusion model.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu_star: f64,
    /// Annualized volatility of the jump-diffusion model.
    #[arg(long, default_value_t = 0.0)]
    sigma_star: f64,
    /// Jump intensity per year.
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Multiplicative down-jump fraction.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Period length in years.
    #[arg(long, default_value_t = 1.0 / 252.0)]
    dt: f64,
    /// Horizon in periods.
    #[arg(long, short)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    n_paths: usize,
    /// Master seed; path i draws from stream i.
    #[arg(long)]
    seed: u64,
    /// Worker threads (bounds parallelism only; results are identical).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Allocation constant.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Decision weight; defaults to 1 / (1 + eps).
    #[arg(long, short)]
    w: Option<f64>,
    /// Proportional transaction-cost rate (decimal or `x%`).
    #[arg(long, value_parser = parse_rate, default_value = "0.01%")]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    v0: f64,
    #[arg(long, default_value_t = -0.95, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 1.0)]
    x_max: f64,
    /// Grid start for the annualized drift.
    #[arg(long, default_value_t = -0.9, allow_hyphen_values = true)]
    mu_star_min: f64,
    /// Grid end (inclusive).
    #[arg(long, default_value_t = 0.9)]
    mu_star_max: f64,
    /// Grid step.
    #[arg(long, default_value_t = 0.01)]
    mu_star_step: f64,
    /// Jump intensity per year.
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Multiplicative down-jump fraction.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Period length in years.
    #[arg(long, default_value_t = 1.0 / 252.0)]
    dt: f64,
    /// Periods per path.
    #[arg(long, short, default_value_t = 252)]
    k: usize,
    /// Paths per grid point.
    #[arg(long, default_value_t = 10_000)]
    n_paths: usize,
    /// Master seed for the whole sweep.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BacktestArgs {
    /// Input close-price CSV with header `date,close`.
    #[arg(long)]
    prices: PathBuf,
    /// Single allocation constant to run.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Comma-separated allocation constants; overrides --alpha.
    #[arg(long)]
    alpha_list: Option<String>,
    #[arg(long, short)]
    w: f64,
    #[arg(long, value_parser = parse_rate, default_value = "0")]
    eps: f64,
    #[arg(long, default_value_t = 100_000.0)]
    v0: f64,
    /// Override for the configured worst-case return (defaults to the
    /// observed minimum, which is in-sample).
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    /// Override for the configured best-case return (defaults to the
    /// observed maximum, which is in-sample).
    #[arg(long)]
    x_max: Option<f64>,
    /// Directory for per-alpha trajectory CSVs and summary.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Internal(String),
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            AnalyticsError::NegativeVariance { .. } => CliError::Internal(e.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::Analytics(AnalyticsError::NegativeVariance { .. }) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<BacktestError> for CliError {
    fn from(e: BacktestError) -> Self {
        match e {
            BacktestError::Io(inner) => CliError::Internal(inner.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analytics(args) => cmd_analytics(&args),
        Command::Montecarlo(args) => cmd_montecarlo(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Backtest(args) => cmd_backtest(&args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            std::process::exit(1);
        }
    }
}

/// 17 significant digits: every value round-trips exactly.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn install_pool<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match workers {
        None => Ok(f()),
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(pool.install(f))
        }
        Some(_) => Err(CliError::Usage("--workers must be >= 1".into())),
    }
}

fn cmd_analytics(args: &AnalyticsArgs) -> Result<(), CliError> {
    let policy = args.policy.build()?;
    let stats = ReturnStats { mu: args.mu, sigma: args.sigma };
    if args.mu <= -1.0 {
        return Err(CliError::Usage(format!("mu must be > -1, got {}", args.mu)));
    }
    if args.sigma < 0.0 {
        return Err(CliError::Usage(format!("sigma must be >= 0, got {}", args.sigma)));
    }

    let gain = expected_gain(&policy, &stats, args.k);
    let variance = variance_gain(&policy, &stats, args.k)?;
    let critical = critical_mus(&policy, args.k).ok();
    let mu_zero = minimizing_mu(&policy, args.k).ok();
    if args.critical_points && (critical.is_none() || mu_zero.is_none()) {
        return Err(CliError::Usage(
            "drift thresholds need alpha in (0, 1), w > 0, and k >= 2".into(),
        ));
    }

    let (mu_minus, mu_plus) = critical.map_or((None, None), |(lo, hi)| (Some(lo), Some(hi)));
    let content = match args.format {
        Format::Json => {
            let value = json!({
                "alpha": policy.alpha,
                "w": policy.w,
                "eps": policy.eps,
                "v0": policy.v0,
                "mu": stats.mu,
                "sigma": stats.sigma,
                "k": args.k,
                "expected_gain": gain,
                "variance": variance,
                "std": variance.sqrt(),
                "mu_plus": mu_plus,
                "mu_minus": mu_minus,
                "mu_zero": mu_zero,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable"))
        }
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(full).unwrap_or_default();
            format!(
                "expected_gain,variance,std,mu_plus,mu_minus,mu_zero\n{},{},{},{},{},{}\n",
                full(gain),
                full(variance),
                full(variance.sqrt()),
                opt(mu_plus),
                opt(mu_minus),
                opt(mu_zero),
            )
        }
    };
    emit(&args.out, &content)
}

fn cmd_montecarlo(args: &MontecarloArgs) -> Result<(), CliError> {
    let policy = args.policy.build()?;
    let model = match args.model {
        ModelKind::TwoPoint => {
            ReturnModel::TwoPoint(TwoPointModel::new(args.up, args.down, args.p_up)?)
        }
        ModelKind::GbmJump => ReturnModel::GbmJump(GbmJumpParams::new(
            args.mu_star,
            args.sigma_star,
            args.lambda,
            args.delta,
            args.dt,
            1.0,
        )?),
    };
    let seed = SeedSpec::new(args.seed, 0);
    let est = install_pool(args.workers, || {
        estimate(&policy, &model, args.k, args.n_paths, seed)
    })??;
    let stats = model.stats();
    let analytic_mean = expected_gain(&policy, &stats, args.k);
    let analytic_std = variance_gain(&policy, &stats, args.k)?.sqrt();

    let content = match args.format {
        Format::Json => {
            let value = json!({
                "model": model,
                "policy": policy,
                "k": args.k,
                "seed": args.seed,
                "mc": est,
                "analytic_mean": analytic_mean,
                "analytic_std": analytic_std,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable"))
        }
        Format::Csv => format!(
            "mc_mean,mc_std,mc_se,n_paths,k,analytic_mean,analytic_std\n{},{},{},{},{},{},{}\n",
            full(est.mean),
            full(est.std),
            full(est.std_error),
            est.n_paths,
            est.k,
            full(analytic_mean),
            full(analytic_std),
        ),
    };
    emit(&args.out, &content)
}

fn sweep_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) || max < min {
        return Err(CliError::Usage(format!(
            "bad grid: min {min}, max {max}, step {step}"
        )));
    }
    let n = ((max - min) / step).round() as usize;
    Ok((0..=n).map(|i| min + i as f64 * step).collect())
}

fn sweep_rows_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "mu_star,sigma_star,analytic_mean,analytic_std,mc_mean,mc_std,mc_se,n_paths\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            full(r.mu_star),
            full(r.sigma_star),
            full(r.analytic_mean),
            full(r.analytic_std),
            full(r.mc.mean),
            full(r.mc.std),
            full(r.mc.std_error),
            r.mc.n_paths,
        ));
    }
    out
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let w = match args.w {
        Some(w) => w,
        None => 1.0 / (1.0 + args.eps),
    };
    let bounds = ReturnBounds { x_min: args.x_min, x_max: args.x_max };
    let policy = PolicyParams::new(args.alpha, w, args.eps, args.v0, bounds)?;
    let jump = GbmJumpParams::new(0.0, 0.0, args.lambda, args.delta, args.dt, 1.0)?;
    let config = SweepConfig {
        policy,
        jump,
        mu_star_grid: sweep_grid(args.mu_star_min, args.mu_star_max, args.mu_star_step)?,
        n_paths: args.n_paths,
        k: args.k,
    };
    let seed = SeedSpec::new(args.seed, 0);
    let rows = install_pool(args.workers, || sweep(&config, seed))??;

    let content = match args.format {
        Format::Csv => sweep_rows_csv(&rows),
        Format::Json => {
            format!("{}\n", serde_json::to_string_pretty(&rows).expect("serializable"))
        }
    };
    emit(&args.out, &content)
}

fn alpha_file_name(alpha: f64) -> String {
    format!("trajectory_alpha_{alpha}.csv")
}

fn cmd_backtest(args: &BacktestArgs) -> Result<(), CliError> {
    let raw = fs::read(&args.prices)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.prices.display())))?;
    let series = load_prices(raw.as_slice())?;
    let returns = to_returns(&series);
    let summary = summarize(&returns)?;

    let x_min = match args.x_min {
        Some(v) => v,
        None => {
            eprintln!(
                "warning: using in-sample observed minimum return {} as x_min",
                summary.x_min_observed
            );
            summary.x_min_observed
        }
    };
    let x_max = match args.x_max {
        Some(v) => v,
        None => {
            eprintln!(
                "warning: using in-sample observed maximum return {} as x_max",
                summary.x_max_observed
            );
            summary.x_max_observed
        }
    };
    let bounds = ReturnBounds { x_min, x_max };

    let alphas = match &args.alpha_list {
        Some(list) => parse_alpha_list(list).map_err(CliError::Usage)?,
        None => vec![args.alpha],
    };
    if alphas.is_empty() {
        return Err(CliError::Usage("--alpha-list must not be empty".into()));
    }

    fs::create_dir_all(&args.out)?;
    let mut final_gains = serde_json::Map::new();
    let mut files = Vec::new();
    for &alpha in &alphas {
        let policy = PolicyParams::new(alpha, args.w, args.eps, args.v0, bounds)?;
        let run = run_backtest(&series, &policy)?;
        if !run.out_of_bounds.is_empty() {
            eprintln!(
                "warning: {} returns fall outside the configured bounds (alpha {alpha})",
                run.out_of_bounds.len()
            );
        }
        let name = alpha_file_name(alpha);
        let path = args.out.join(&name);
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &run.trajectory, &series.dates)?;
        fs::write(&path, &buf)?;
        final_gains.insert(
            format!("{alpha}"),
            serde_json::Value::from(run.trajectory.final_gain_loss()),
        );
        files.push(name);
    }

    let value = json!({
        "n_prices": series.len(),
        "returns": summary,
        "w": args.w,
        "eps": args.eps,
        "v0": args.v0,
        "x_min": x_min,
        "x_max": x_max,
        "final_gain_loss": final_gains,
        "files": files,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable"));
    fs::write(args.out.join("summary.json"), &text)?;
    let stdout_copy = match args.format {
        Format::Json => text,
        Format::Csv => {
            let mut s = String::from("alpha,final_gain_loss\n");
            for &alpha in &alphas {
                let v = final_gains[&format!("{alpha}")].as_f64().expect("set above");
                s.push_str(&format!("{alpha},{}\n", full(v)));
            }
            s
        }
    };
    print!("{stdout_copy}");
    Ok(())
}
