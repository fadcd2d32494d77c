//! The `tailproc` command line:
//! `simulate | estimate | hill | benchmark | asymvar | verify`.
//!
//! Every subcommand is a thin adapter over the library (identical results to
//! direct calls), all randomized subcommands require an explicit `--seed`,
//! and CSV goes to `--out` or standard output. Exit codes: 0 success, 2
//! usage error, 1 runtime error with a one-line `error: ...` on stderr.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::bench::{run_bench, BenchConfig, GridSpec};
use crate::error::{Error, Result};
use crate::estimators::{cdf_curve, AlphaMode, EstimatorConfig, Series, ThresholdRule};
use crate::models::{simulate, Model, ModelSpec};
use crate::rs::{is_rs_invariant, max_time_change_residual};
use crate::spectral::{IntervalSet, SpectralLaw};
use crate::{asymvar, estimators};

#[derive(Parser)]
#[command(name = "tailproc", version, about = "Spectral tail process estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a model path, one value per line
    Simulate(SimulateArgs),
    /// Estimate the cdf of Theta_lag on a grid, CSV output
    Estimate(EstimateArgs),
    /// Hill estimate of the tail index
    Hill(HillArgs),
    /// Run a Monte Carlo benchmark described by a config file
    Benchmark(BenchmarkArgs),
    /// Exact asymptotic variance curves for the two-shape example law
    Asymvar(AsymvarArgs),
    /// Check a law file for RS-invariance and the time-change identity
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Model name: garcht, sre or sv
    #[arg(long)]
    model: String,
    #[arg(long)]
    seed: u64,
    /// Number of values to emit (after burn-in)
    #[arg(long)]
    length: usize,
    /// Override the model's default burn-in
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesSource {
    /// Model name: garcht, sre or sv (simulated input)
    #[arg(long, conflicts_with = "input")]
    model: Option<String>,
    /// Seed for the simulated input
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    seed: Option<u64>,
    /// Read the series from a one-value-per-line file instead
    #[arg(long, required_unless_present = "model")]
    input: Option<PathBuf>,
    /// Override the model's default burn-in
    #[arg(long)]
    burn_in: Option<usize>,
}

impl SeriesSource {
    /// Produces a series with `pad` values of padding on each side of an
    /// `n`-value core. File input must already contain `n + 2 pad` values.
    fn load(&self, n: usize, pad: usize) -> Result<Series> {
        match (&self.model, &self.input) {
            (Some(name), None) => {
                let spec = ModelSpec {
                    model: Model::parse(name)?,
                    seed: self.seed.expect("clap enforces seed with model"),
                    burn_in: self.burn_in,
                };
                Series::with_padding(simulate(&spec, n + 2 * pad), pad)
            }
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)?;
                let values: Result<Vec<f64>> = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(|l| {
                        l.parse()
                            .map_err(|_| Error::Parse(format!("bad series value `{l}`")))
                    })
                    .collect();
                Series::with_padding(values?, pad)
            }
            _ => Err(Error::Parse("provide either --model/--seed or --input".into())),
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    source: SeriesSource,
    /// Core length of the estimation window
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Threshold quantile of the absolute values
    #[arg(long, default_value_t = 0.95)]
    q: f64,
    /// Fixed threshold overriding the quantile rule
    #[arg(long)]
    abs_threshold: Option<f64>,
    /// Block half-width of the projection estimator
    #[arg(long = "sn", default_value_t = 30)]
    s_n: usize,
    #[arg(long, default_value_t = 1)]
    lag: i32,
    /// Known tail index; adds a known-alpha projection column
    #[arg(long)]
    alpha: Option<f64>,
    /// Evaluation grid lo:hi:step
    #[arg(long, default_value = "-2:2:0.01", allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HillArgs {
    #[command(flatten)]
    source: SeriesSource,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 0.95)]
    q: f64,
    #[arg(long)]
    abs_threshold: Option<f64>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Config file: JSON or flat key=value lines
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// CSV report destination (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata sidecar destination (default: <out>.meta.json when --out is set)
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct AsymvarArgs {
    /// Law family; only `example` (the two-shape law) is built in
    #[arg(long, default_value = "example")]
    model: String,
    /// Single mixture weight
    #[arg(long, conflicts_with = "p_grid")]
    p: Option<f64>,
    /// Mixture weight grid lo:hi:step
    #[arg(long)]
    p_grid: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    a: f64,
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    lag: i32,
    /// Evaluation set: le:<x>, gt:<x> or all
    #[arg(long)]
    set: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Law file in the `alpha=` / one-atom-per-line format
    #[arg(long)]
    law: PathBuf,
    /// Invariance tolerance in total variation
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

fn write_out(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(Into::into),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn threshold_rule(q: f64, abs: Option<f64>) -> ThresholdRule {
    match abs {
        Some(u) => ThresholdRule::Absolute(u),
        None => ThresholdRule::Quantile(q),
    }
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let spec = ModelSpec {
        model: Model::parse(&args.model)?,
        seed: args.seed,
        burn_in: args.burn_in,
    };
    let values = simulate(&spec, args.length);
    let mut text = String::with_capacity(values.len() * 20);
    for v in values {
        let _ = writeln!(text, "{v}");
    }
    write_out(&args.out, &text)
}

fn run_estimate(args: EstimateArgs) -> Result<()> {
    let pad = args.s_n + args.lag.unsigned_abs() as usize;
    let series = args.source.load(args.n, pad)?;
    let cfg = EstimatorConfig {
        threshold: threshold_rule(args.q, args.abs_threshold),
        block_half_width: args.s_n,
        lag: args.lag,
        alpha_mode: match args.alpha {
            Some(a) => AlphaMode::Known(a),
            None => AlphaMode::HillEstimated,
        },
    };
    let grid = GridSpec::parse(&args.grid)?.points();
    let report = cdf_curve(&series, &cfg, &grid)?;
    let mut text = String::new();
    let _ = writeln!(text, "# u_n={:.16e}", report.u_n);
    let _ = writeln!(text, "# alpha_hat={:.16e}", report.alpha_hat);
    let _ = writeln!(text, "# s_n={} lag={}", args.s_n, args.lag);
    let _ = writeln!(text, "# exceedances={}", report.exceedances);
    if let Some(seed) = args.source.seed {
        let _ = writeln!(text, "# seed={seed}");
    }
    let with_known = report.projection.is_some();
    let _ = writeln!(
        text,
        "x,forward,backward,projection_hat{}",
        if with_known { ",projection" } else { "" }
    );
    for (j, &x) in report.x.iter().enumerate() {
        let _ = write!(
            text,
            "{x},{},{},{}",
            report.forward[j], report.backward[j], report.projection_hat[j]
        );
        if let Some(proj) = &report.projection {
            let _ = write!(text, ",{}", proj[j]);
        }
        text.push('\n');
    }
    write_out(&args.out, &text)
}

fn run_hill(args: HillArgs) -> Result<()> {
    let series = args.source.load(args.n, 0)?;
    let u = estimators::threshold(&series, threshold_rule(args.q, args.abs_threshold))?;
    let alpha_hat = estimators::hill(&series, u)?;
    let exceedances = series.core().iter().filter(|v| v.abs() > u).count();
    println!("alpha_hat={alpha_hat:.12} u_n={u:.12} exceedances={exceedances}");
    Ok(())
}

fn run_benchmark(args: BenchmarkArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = BenchConfig::from_text(&text)?;
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    let report = run_bench(&cfg)?;
    if report.warn_failures {
        log::warn!(
            "{} of {} replications failed on a degenerate threshold",
            report.failed_replications,
            report.replications
        );
    }
    write_out(&args.out, &report.to_csv())?;
    let meta_path = args.meta.or_else(|| {
        args.out
            .as_ref()
            .map(|p| p.with_extension("meta.json"))
    });
    if let Some(path) = meta_path {
        std::fs::write(&path, serde_json::to_string_pretty(&report.meta_json()).unwrap())?;
    }
    Ok(())
}

fn run_asymvar(args: AsymvarArgs) -> Result<()> {
    if args.model != "example" {
        return Err(Error::Parse(format!(
            "unknown asymvar model `{}`; only `example` is available",
            args.model
        )));
    }
    let set = IntervalSet::parse(&args.set)?;
    let ps: Vec<f64> = match (&args.p, &args.p_grid) {
        (Some(p), None) => vec![*p],
        (None, Some(grid)) => GridSpec::parse(grid)?.points(),
        (None, None) => return Err(Error::Parse("provide --p or --p-grid".into())),
        _ => unreachable!("clap conflicts_with"),
    };
    let rows: Result<Vec<String>> = ps
        .par_iter()
        .map(|&p| {
            let law = asymvar::example_law(p, args.a, args.b)?;
            Ok(format!(
                "{p},{},{},{},{}",
                asymvar::var_projection_hat(&law, args.lag, set)?,
                asymvar::var_backward(&law, args.lag, set)?,
                asymvar::var_forward(&law, args.lag, set)?,
                asymvar::var_projection_known(&law, args.lag, set)?,
            ))
        })
        .collect();
    let mut text = String::from("p,var_proj_hat,var_backward,var_forward,var_proj_known\n");
    for row in rows? {
        text.push_str(&row);
        text.push('\n');
    }
    write_out(&args.out, &text)
}

fn run_verify(args: VerifyArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.law)?;
    let law = SpectralLaw::from_text(&text)?;
    let check = is_rs_invariant(&law, args.tol);
    let residual = max_time_change_residual(&law)?;
    println!(
        "RS-invariant: {} (TV={:.3e}, tol={:.1e})",
        if check.invariant { "yes" } else { "no" },
        check.tv,
        args.tol
    );
    println!("time-change residual max: {residual:.3e} (lags -3..=3, 20 functionals)");
    if !check.invariant {
        return Err(Error::NotASpectralLaw { tv: check.tv, tol: args.tol });
    }
    Ok(())
}

/// Parses arguments and dispatches; the binary's whole `main`.
pub fn run() -> ExitCode {
    let _ = env_logger::Builder::from_default_env().try_init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Estimate(args) => run_estimate(args),
        Command::Hill(args) => run_hill(args),
        Command::Benchmark(args) => run_benchmark(args),
        Command::Asymvar(args) => run_asymvar(args),
        Command::Verify(args) => run_verify(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
