//! Monte Carlo benchmark harness: replicate simulation, estimation and
//! aggregation into mean / sd / RMSE / relative-efficiency tables, plus
//! block-length and threshold sweeps.
//!
//! Reproducibility contract: replication `r` draws its series from the seed
//! `derive_seed(master_seed, r)` and the reference stream from
//! `derive_seed(master_seed, u64::MAX)`, results are collected into
//! replication-indexed slots and reduced in index order, so a report is a
//! pure function of its config regardless of the worker-thread count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    cdf_curve, threshold, AlphaMode, CdfReport, EstimatorConfig, Series, ThresholdRule,
};
use crate::models::{mc_true_cdf, pre_asymptotic_cdf, simulate, Model, ModelSpec};
use crate::numeric::quantile_order_statistic;
use crate::rng::derive_seed;

/// Stream index reserved for the reference cdf sampler.
const REFERENCE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Forward,
    Backward,
    ProjectionHat,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Forward => "forward",
            EstimatorKind::Backward => "backward",
            EstimatorKind::ProjectionHat => "projection_hat",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "forward" => Ok(EstimatorKind::Forward),
            "backward" => Ok(EstimatorKind::Backward),
            "projection_hat" | "projection-hat" => Ok(EstimatorKind::ProjectionHat),
            other => Err(Error::Parse(format!("unknown estimator `{other}`"))),
        }
    }

    fn column(self, report: &CdfReport) -> &[f64] {
        match self {
            EstimatorKind::Forward => &report.forward,
            EstimatorKind::Backward => &report.backward,
            EstimatorKind::ProjectionHat => &report.projection_hat,
        }
    }
}

/// Whether estimates are scored against the tail-process limit cdf or the
/// finite-threshold conditional cdf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Limit,
    PreAsymptotic,
}

/// An inclusive arithmetic grid `lo, lo+step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.hi <= self.lo || self.step.is_nan() || self.step <= 0.0 {
            return vec![self.lo];
        }
        let n = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::Parse("grid bounds must be finite".into()));
        }
        if self.hi > self.lo {
            if self.step.is_nan() || self.step <= 0.0 {
                return Err(Error::Parse(format!("grid step must be positive, got {}", self.step)));
            }
            if (self.hi - self.lo) / self.step > 1e7 {
                return Err(Error::Parse("grid has more than 1e7 points".into()));
            }
        }
        Ok(())
    }

    /// Parses `lo:hi:step` (or a single number for a one-point grid).
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad grid component `{t}`")))
        };
        let grid = match parts.as_slice() {
            [single] => {
                let x = num(single)?;
                GridSpec { lo: x, hi: x, step: 1.0 }
            }
            [lo, hi, step] => GridSpec { lo: num(lo)?, hi: num(hi)?, step: num(step)? },
            _ => return Err(Error::Parse(format!("bad grid `{s}`: expected lo:hi:step"))),
        };
        grid.validate()?;
        Ok(grid)
    }
}

fn default_replications() -> usize {
    1000
}
fn default_n() -> usize {
    2000
}
fn default_quantile() -> f64 {
    0.95
}
fn default_s_n() -> usize {
    30
}
fn default_lags() -> Vec<i32> {
    vec![1]
}
fn default_grid() -> GridSpec {
    GridSpec { lo: -2.0, hi: 2.0, step: 0.01 }
}
fn default_target() -> Target {
    Target::Limit
}
fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::Forward, EstimatorKind::Backward, EstimatorKind::ProjectionHat]
}
fn default_reference_samples() -> usize {
    1_000_000
}

/// Full description of a benchmark run. Defaults mirror the reference study:
/// 1000 replications of length-2000 series, 95% quantile threshold, block
/// half-width 30 and the grid `[-2, 2]` in steps of 0.01.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// `garcht`, `sre` or `sv`.
    pub model: String,
    pub master_seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
    /// Fixed threshold overriding the quantile rule when present.
    #[serde(default)]
    pub absolute_threshold: Option<f64>,
    #[serde(default = "default_s_n")]
    pub s_n: usize,
    #[serde(default = "default_lags")]
    pub lags: Vec<i32>,
    #[serde(default = "default_grid")]
    pub x_grid: GridSpec,
    #[serde(default = "default_target")]
    pub target: Target,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    /// Sample size of the Monte Carlo reference cdf.
    #[serde(default = "default_reference_samples")]
    pub reference_samples: usize,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub burn_in: Option<usize>,
}

impl BenchConfig {
    pub fn new(model: &str, master_seed: u64) -> Self {
        BenchConfig {
            model: model.to_string(),
            master_seed,
            replications: default_replications(),
            n: default_n(),
            quantile: default_quantile(),
            absolute_threshold: None,
            s_n: default_s_n(),
            lags: default_lags(),
            x_grid: default_grid(),
            target: default_target(),
            estimators: default_estimators(),
            reference_samples: default_reference_samples(),
            threads: None,
            burn_in: None,
        }
    }

    /// Accepts either a JSON document or flat `key=value` lines (with `lags`
    /// and `estimators` comma-separated and `x_grid` as `lo:hi:step`).
    pub fn from_text(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()));
        }
        let mut map = serde_json::Map::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", ln + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let json = match key {
                "model" | "target" => serde_json::Value::String(value.to_ascii_lowercase()),
                "lags" => serde_json::Value::Array(
                    value
                        .split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<i64>()
                                .map(Into::into)
                                .map_err(|_| Error::Parse(format!("bad lag `{t}`")))
                        })
                        .collect::<Result<_>>()?,
                ),
                "estimators" => serde_json::Value::Array(
                    value
                        .split(',')
                        .map(|t| {
                            EstimatorKind::parse(t)
                                .map(|k| serde_json::Value::String(k.name().to_string()))
                        })
                        .collect::<Result<_>>()?,
                ),
                "x_grid" => serde_json::to_value(GridSpec::parse(value)?).unwrap(),
                _ => {
                    // integers first so u64 seeds and counts survive
                    if let Ok(n) = value.parse::<u64>() {
                        serde_json::Number::from(n).into()
                    } else if let Ok(n) = value.parse::<i64>() {
                        serde_json::Number::from(n).into()
                    } else {
                        let n: f64 = value.parse().map_err(|_| {
                            Error::Parse(format!("line {}: bad number for `{key}`", ln + 1))
                        })?;
                        serde_json::Number::from_f64(n).map(Into::into).unwrap()
                    }
                }
            };
            map.insert(key.to_string(), json);
        }
        serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| Error::Parse(e.to_string()))
    }

    fn threshold_rule(&self) -> ThresholdRule {
        match self.absolute_threshold {
            Some(u) => ThresholdRule::Absolute(u),
            None => ThresholdRule::Quantile(self.quantile),
        }
    }

    fn model_spec(&self, seed: u64) -> Result<ModelSpec> {
        let model = Model::parse(&self.model)?;
        Ok(ModelSpec { model, seed, burn_in: self.burn_in })
    }

    fn max_abs_lag(&self) -> usize {
        self.lags.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

/// One aggregated table row.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BenchCell {
    pub estimator: EstimatorKind,
    pub lag: i32,
    pub x: f64,
    pub mean: f64,
    pub sd: f64,
    pub rmse: f64,
    /// RMSE relative to the projection estimator's RMSE in the same cell;
    /// NaN when the projection estimator is not part of the run.
    pub rel_eff: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub cells: Vec<BenchCell>,
    pub replications: usize,
    pub effective_replications: usize,
    pub failed_replications: usize,
    /// Set when more than 1% of the replications failed.
    pub warn_failures: bool,
    pub wall_secs: f64,
    pub config: BenchConfig,
}

impl BenchReport {
    /// `estimator,lag,x,mean,sd,rmse,rel_eff` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,lag,x,mean,sd,rmse,rel_eff\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.estimator.name(),
                c.lag,
                c.x,
                c.mean,
                c.sd,
                c.rmse,
                c.rel_eff
            ));
        }
        out
    }

    /// Config echo plus run accounting, for the JSON sidecar.
    pub fn meta_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "replications": self.replications,
            "effective_replications": self.effective_replications,
            "failed_replications": self.failed_replications,
            "warn_failures": self.warn_failures,
            "wall_secs": self.wall_secs,
        })
    }

    pub fn cell(&self, estimator: EstimatorKind, lag: i32, x: f64) -> Option<&BenchCell> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.lag == lag && (c.x - x).abs() < 1e-12)
    }
}

/// Reference cdf values per lag, on the benchmark grid.
fn reference_curves(cfg: &BenchConfig, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    let spec = cfg.model_spec(derive_seed(cfg.master_seed, REFERENCE_STREAM))?;
    let mut out = Vec::with_capacity(cfg.lags.len());
    for &lag in &cfg.lags {
        let curve = match cfg.target {
            Target::Limit => {
                if lag < 1 {
                    return Err(Error::ReferenceUnavailable(format!(
                        "limit reference needs forward lags, got {lag}"
                    )));
                }
                mc_true_cdf(&spec, lag, grid, cfg.reference_samples)?
            }
            Target::PreAsymptotic => {
                let u = match cfg.absolute_threshold {
                    Some(u) => u,
                    None => {
                        let sample = simulate(&spec, cfg.reference_samples);
                        let abs: Vec<f64> = sample.iter().map(|v| v.abs()).collect();
                        quantile_order_statistic(&abs, cfg.quantile)
                    }
                };
                pre_asymptotic_cdf(&spec, u, lag, grid, cfg.reference_samples)?
            }
        };
        out.push(curve.cdf);
    }
    Ok(out)
}

/// Per-replication estimates, laid out as `[estimator][lag][x]`.
type RepEstimates = Vec<Vec<Vec<f64>>>;

fn run_replication(
    cfg: &BenchConfig,
    grid: &[f64],
    s_values: &[usize],
    rep: u64,
) -> Result<Option<Vec<RepEstimates>>> {
    let pad = s_values.iter().max().unwrap() + cfg.max_abs_lag();
    let spec = cfg.model_spec(derive_seed(cfg.master_seed, rep))?;
    let values = simulate(&spec, cfg.n + 2 * pad);
    let series = Series::with_padding(values, pad)?;
    let mut per_s = Vec::with_capacity(s_values.len());
    for &s_n in s_values {
        let mut per_est: RepEstimates =
            vec![Vec::with_capacity(cfg.lags.len()); cfg.estimators.len()];
        for &lag in &cfg.lags {
            let est_cfg = EstimatorConfig {
                threshold: cfg.threshold_rule(),
                block_half_width: s_n,
                lag,
                alpha_mode: AlphaMode::HillEstimated,
            };
            let report = match cdf_curve(&series, &est_cfg, grid) {
                Ok(r) => r,
                Err(Error::DegenerateThreshold) => return Ok(None),
                Err(e) => return Err(e),
            };
            for (slot, kind) in per_est.iter_mut().zip(&cfg.estimators) {
                slot.push(kind.column(&report).to_vec());
            }
        }
        per_s.push(per_est);
    }
    Ok(Some(per_s))
}

fn aggregate(
    cfg: &BenchConfig,
    grid: &[f64],
    references: &[Vec<f64>],
    outcomes: Vec<Option<RepEstimates>>,
    wall_secs: f64,
) -> Result<BenchReport> {
    let total = outcomes.len();
    let kept: Vec<RepEstimates> = outcomes.into_iter().flatten().collect();
    let failed = total - kept.len();
    if kept.is_empty() {
        return Err(Error::AllReplicationsFailed(total));
    }
    let m = kept.len() as f64;
    let proj_idx = cfg
        .estimators
        .iter()
        .position(|k| *k == EstimatorKind::ProjectionHat);
    // rmse of the projection estimator per (lag, x), as the rel_eff divisor
    let proj_rmse: Option<Vec<Vec<f64>>> = proj_idx.map(|pi| {
        cfg.lags
            .iter()
            .enumerate()
            .map(|(li, _)| {
                (0..grid.len())
                    .map(|xi| {
                        let mse = kept
                            .iter()
                            .map(|rep| (rep[pi][li][xi] - references[li][xi]).powi(2))
                            .sum::<f64>()
                            / m;
                        mse.sqrt()
                    })
                    .collect()
            })
            .collect()
    });
    let mut cells = Vec::with_capacity(cfg.estimators.len() * cfg.lags.len() * grid.len());
    for (ei, &kind) in cfg.estimators.iter().enumerate() {
        for (li, &lag) in cfg.lags.iter().enumerate() {
            for (xi, &x) in grid.iter().enumerate() {
                let reference = references[li][xi];
                let mean = kept.iter().map(|rep| rep[ei][li][xi]).sum::<f64>() / m;
                let var = kept
                    .iter()
                    .map(|rep| (rep[ei][li][xi] - mean).powi(2))
                    .sum::<f64>()
                    / m;
                let mse = kept
                    .iter()
                    .map(|rep| (rep[ei][li][xi] - reference).powi(2))
                    .sum::<f64>()
                    / m;
                let rmse = mse.sqrt();
                let rel_eff = match &proj_rmse {
                    Some(pr) => rmse / pr[li][xi],
                    None => f64::NAN,
                };
                cells.push(BenchCell {
                    estimator: kind,
                    lag,
                    x,
                    mean,
                    sd: var.sqrt(),
                    rmse,
                    rel_eff,
                    reference,
                });
            }
        }
    }
    Ok(BenchReport {
        cells,
        replications: total,
        effective_replications: kept.len(),
        failed_replications: failed,
        warn_failures: failed as f64 > 0.01 * total as f64,
        wall_secs,
        config: cfg.clone(),
    })
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs the full replicate-simulate-estimate-aggregate pipeline.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let grids = run_sweep(cfg, &[cfg.s_n])?;
    Ok(grids.into_iter().next().unwrap().1)
}

/// Benchmarks every block half-width in `s_grid` on the *same* simulated
/// series (shared per-replication seeds), isolating the block-length effect.
pub fn sweep_block_length(
    cfg: &BenchConfig,
    s_grid: &[usize],
) -> Result<Vec<(usize, BenchReport)>> {
    run_sweep(cfg, s_grid)
}

fn run_sweep(cfg: &BenchConfig, s_grid: &[usize]) -> Result<Vec<(usize, BenchReport)>> {
    if s_grid.is_empty() || cfg.lags.is_empty() || cfg.replications == 0 {
        return Err(Error::Parse("empty benchmark axes".into()));
    }
    cfg.x_grid.validate()?;
    let start = Instant::now();
    let grid = cfg.x_grid.points();
    let references = reference_curves(cfg, &grid)?;
    let outcomes: Vec<Result<Option<Vec<RepEstimates>>>> = with_pool(cfg.threads, || {
        (0..cfg.replications as u64)
            .into_par_iter()
            .map(|rep| run_replication(cfg, &grid, s_grid, rep))
            .collect()
    })?;
    let mut per_rep = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        per_rep.push(o?);
    }
    let wall = start.elapsed().as_secs_f64();
    s_grid
        .iter()
        .enumerate()
        .map(|(si, &s_n)| {
            let slice: Vec<Option<RepEstimates>> = per_rep
                .iter()
                .map(|rep| rep.as_ref().map(|per_s| per_s[si].clone()))
                .collect();
            let mut cfg_s = cfg.clone();
            cfg_s.s_n = s_n;
            aggregate(&cfg_s, &grid, &references, slice, wall).map(|r| (s_n, r))
        })
        .collect()
}

/// Benchmarks every quantile in `q_grid` on the same simulated series.
pub fn sweep_threshold(cfg: &BenchConfig, q_grid: &[f64]) -> Result<Vec<(f64, BenchReport)>> {
    q_grid
        .iter()
        .map(|&q| {
            let mut cfg_q = cfg.clone();
            cfg_q.quantile = q;
            cfg_q.absolute_threshold = None;
            run_bench(&cfg_q).map(|r| (q, r))
        })
        .collect()
}

/// One point of the block-length diagnostic plot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SnPlotPoint {
    pub s_n: usize,
    pub lag: i32,
    pub estimate: f64,
}

/// Projection estimates on a single fixed series across block half-widths,
/// the analogue of a Hill plot for choosing `s_n`.
pub fn single_series_sn_plot(
    series: &Series,
    rule: ThresholdRule,
    lags: &[i32],
    s_grid: &[usize],
    x: f64,
) -> Result<Vec<SnPlotPoint>> {
    let u = threshold(series, rule)?;
    let mut out = Vec::with_capacity(lags.len() * s_grid.len());
    for &s_n in s_grid {
        for &lag in lags {
            if lag.unsigned_abs() as usize > s_n {
                return Err(Error::PaddingViolation {
                    needed: lag.unsigned_abs() as usize,
                    available: s_n,
                });
            }
            let estimate = crate::estimators::projection_hat(
                series,
                u,
                s_n,
                lag,
                crate::spectral::IntervalSet::Le(x),
            )?;
            out.push(SnPlotPoint { s_n, lag, estimate });
        }
    }
    Ok(out)
}
