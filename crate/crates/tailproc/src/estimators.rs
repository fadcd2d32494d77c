//! Sample estimators of tail-process marginals: Hill, forward, backward and
//! the block-projection estimator (with known or estimated tail index).
//!
//! All estimators are ratios of indicator-weighted sums over the strict
//! threshold exceedances of a [`Series`], and all are self-normalized, so
//! rescaling the series and the threshold together leaves them unchanged.
//! Grid evaluation shares the per-exceedance terms with the single-set entry
//! points, which keeps the two routes bit-identical.

use crate::error::{Error, Result};
use crate::numeric::quantile_order_statistic;
use crate::spectral::IntervalSet;

/// Threshold selection: an empirical quantile of the absolute values over the
/// core range, or a fixed absolute level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    Quantile(f64),
    Absolute(f64),
}

/// Whether the projection estimator runs with a known tail index or plugs in
/// the Hill estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    Known(f64),
    HillEstimated,
}

/// Parameters shared by a full estimation pass.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorConfig {
    pub threshold: ThresholdRule,
    /// Block half-width `s_n` of the projection estimator.
    pub block_half_width: usize,
    pub lag: i32,
    pub alpha_mode: AlphaMode,
}

/// An observed series with a designated core range; the estimator sums run
/// over core times only, while window lookups may reach into the padding.
#[derive(Debug, Clone)]
pub struct Series {
    values: Vec<f64>,
    core_start: usize,
    core_end: usize,
}

impl Series {
    /// A series whose core is the whole sample (no padding).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Series::with_padding(values, 0)
    }

    /// A series with `pad` values of padding on each side of the core.
    pub fn with_padding(values: Vec<f64>, pad: usize) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("series values"));
        }
        if values.len() < 2 * pad + 1 {
            return Err(Error::PaddingViolation { needed: pad, available: values.len() / 2 });
        }
        Ok(Series {
            core_end: values.len() - pad,
            values,
            core_start: pad,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn core(&self) -> &[f64] {
        &self.values[self.core_start..self.core_end]
    }

    pub fn core_len(&self) -> usize {
        self.core_end - self.core_start
    }

    fn padding(&self) -> usize {
        self.core_start.min(self.values.len() - self.core_end)
    }

    fn ensure_padding(&self, needed: usize) -> Result<()> {
        if self.padding() < needed {
            return Err(Error::PaddingViolation { needed, available: self.padding() });
        }
        Ok(())
    }

    /// Core times (absolute indices) with `|x_t| > u`.
    fn exceedances(&self, u: f64) -> Result<Vec<usize>> {
        let times: Vec<usize> = (self.core_start..self.core_end)
            .filter(|&t| self.values[t].abs() > u)
            .collect();
        if times.is_empty() {
            return Err(Error::DegenerateThreshold);
        }
        Ok(times)
    }
}

/// Resolves the threshold rule on a series. The quantile rule takes the
/// `ceil(q n)`-th ascending order statistic of the absolute core values, so
/// a fraction of about `1 - q` strictly exceeds it; it fails when nothing
/// does (for instance on a constant series).
pub fn threshold(series: &Series, rule: ThresholdRule) -> Result<f64> {
    match rule {
        ThresholdRule::Absolute(u) => Ok(u),
        ThresholdRule::Quantile(q) => {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::Parse(format!("quantile must be in (0,1), got {q}")));
            }
            let abs: Vec<f64> = series.core().iter().map(|v| v.abs()).collect();
            let u = quantile_order_statistic(&abs, q);
            if !abs.iter().any(|&a| a > u) {
                return Err(Error::DegenerateThreshold);
            }
            Ok(u)
        }
    }
}

/// Hill estimator of the tail index: exceedance count over the sum of
/// positive log-excesses, natural logarithm.
pub fn hill(series: &Series, u: f64) -> Result<f64> {
    let mut count = 0u64;
    let mut log_sum = 0.0;
    for &x in series.core() {
        let a = x.abs();
        if a > u {
            count += 1;
            log_sum += (a / u).ln();
        }
    }
    if count == 0 {
        return Err(Error::DegenerateThreshold);
    }
    Ok(count as f64 / log_sum)
}

// ---------------------------------------------------------------------------
// Shared per-exceedance terms
// ---------------------------------------------------------------------------

struct ForwardTerms {
    ratios: Vec<f64>,
    count: usize,
}

fn forward_terms(series: &Series, u: f64, lag: i32) -> Result<ForwardTerms> {
    series.ensure_padding(lag.unsigned_abs() as usize)?;
    let times = series.exceedances(u)?;
    let ratios = times
        .iter()
        .map(|&t| {
            let idx = (t as i64 + lag as i64) as usize;
            series.values[idx] / series.values[t].abs()
        })
        .collect();
    Ok(ForwardTerms { count: times.len(), ratios })
}

fn eval_forward(terms: &ForwardTerms, set: IntervalSet) -> f64 {
    let hits: f64 = terms.ratios.iter().map(|&r| set.indicator(r)).sum();
    hits / terms.count as f64
}

/// `(value, weight)` per exceedance with a nonzero lagged observation; a zero
/// `x_{t-i}` contributes a zero summand and its ratio is never formed.
struct BackwardTerms {
    terms: Vec<(f64, f64)>,
    count: usize,
}

fn backward_terms(series: &Series, u: f64, lag: i32, alpha_hat: f64) -> Result<BackwardTerms> {
    series.ensure_padding(lag.unsigned_abs() as usize)?;
    let times = series.exceedances(u)?;
    let mut terms = Vec::with_capacity(times.len());
    for &t in &times {
        let x_t = series.values[t];
        let x_lag = series.values[(t as i64 - lag as i64) as usize];
        if x_lag == 0.0 {
            continue;
        }
        let value = x_t / x_lag.abs();
        let weight = (x_lag / x_t).abs().powf(alpha_hat);
        terms.push((value, weight));
    }
    Ok(BackwardTerms { count: times.len(), terms })
}

fn eval_backward(terms: &BackwardTerms, set: IntervalSet) -> f64 {
    let num: f64 = terms
        .terms
        .iter()
        .map(|&(v, w)| set.indicator(v) * w)
        .sum();
    num / terms.count as f64
}

/// One exceedance block of the projection estimator: the window power
/// denominator, the in-window `(ratio, weight)` pairs from lags where the
/// shifted index stays inside the block, and the pooled weight of lags whose
/// shifted index falls outside (indicator evaluated at 0).
struct ProjectionBlock {
    denom: f64,
    terms: Vec<(f64, f64)>,
    outside_weight: f64,
}

struct ProjectionTerms {
    blocks: Vec<ProjectionBlock>,
    count: usize,
}

fn projection_terms(
    series: &Series,
    u: f64,
    s_n: usize,
    lag: i32,
    alpha: f64,
) -> Result<ProjectionTerms> {
    series.ensure_padding(s_n + lag.unsigned_abs() as usize)?;
    let times = series.exceedances(u)?;
    let s = s_n as i32;
    let h_lo = (-s - lag).max(-s);
    let h_hi = (s - lag).min(s);
    let mut blocks = Vec::with_capacity(times.len());
    for &t in &times {
        let at = |off: i32| series.values[(t as i64 + off as i64) as usize];
        let mut denom = 0.0;
        for k in -s..=s {
            denom += at(k).abs().powf(alpha);
        }
        let mut terms = Vec::new();
        let mut outside_weight = 0.0;
        for h in -s..=s {
            let x_h = at(h);
            if x_h == 0.0 {
                continue;
            }
            let w = x_h.abs().powf(alpha);
            if h >= h_lo && h <= h_hi {
                terms.push((at(h + lag) / x_h.abs(), w));
            } else {
                outside_weight += w;
            }
        }
        blocks.push(ProjectionBlock { denom, terms, outside_weight });
    }
    Ok(ProjectionTerms { count: times.len(), blocks })
}

fn eval_projection(terms: &ProjectionTerms, set: IntervalSet) -> f64 {
    let zero_hit = set.indicator(0.0);
    let mut acc = 0.0;
    for block in &terms.blocks {
        let inside: f64 = block.terms.iter().map(|&(r, w)| set.indicator(r) * w).sum();
        acc += (inside + block.outside_weight * zero_hit) / block.denom;
    }
    acc / terms.count as f64
}

// ---------------------------------------------------------------------------
// Public estimators
// ---------------------------------------------------------------------------

/// Forward estimator: fraction of exceedances `t` with
/// `x_{t+lag} / |x_t|` in `set`.
pub fn forward(series: &Series, u: f64, lag: i32, set: IntervalSet) -> Result<f64> {
    Ok(eval_forward(&forward_terms(series, u, lag)?, set))
}

/// Backward estimator: exceedance average of
/// `1{x_t / |x_{t-lag}| in set} * |x_{t-lag} / x_t|^alpha_hat`.
/// May exceed 1 in finite samples.
pub fn backward(
    series: &Series,
    u: f64,
    lag: i32,
    set: IntervalSet,
    alpha_hat: f64,
) -> Result<f64> {
    Ok(eval_backward(&backward_terms(series, u, lag, alpha_hat)?, set))
}

/// Projection estimator with known tail index: for each exceedance `t`, the
/// block weights `|x_{t+h}|^alpha / sum_k |x_{t+k}|^alpha` form a partition
/// of unity over `h in [-s_n, s_n]`; lags whose shifted index leaves the
/// block contribute their weight at the point 0.
pub fn projection(
    series: &Series,
    u: f64,
    s_n: usize,
    lag: i32,
    alpha: f64,
    set: IntervalSet,
) -> Result<f64> {
    Ok(eval_projection(&projection_terms(series, u, s_n, lag, alpha)?, set))
}

/// Projection estimator with the Hill plug-in for the tail index.
pub fn projection_hat(
    series: &Series,
    u: f64,
    s_n: usize,
    lag: i32,
    set: IntervalSet,
) -> Result<f64> {
    let alpha_hat = hill(series, u)?;
    projection(series, u, s_n, lag, alpha_hat, set)
}

/// Estimates over a grid of sets `(-inf, x]`, one column per estimator.
#[derive(Debug, Clone)]
pub struct CdfReport {
    pub x: Vec<f64>,
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
    pub projection_hat: Vec<f64>,
    /// Present when the configuration fixes a known tail index.
    pub projection: Option<Vec<f64>>,
    pub u_n: f64,
    pub alpha_hat: f64,
    pub exceedances: usize,
}

/// Evaluates all estimators over an ascending grid in one pass. The
/// exceedance set and per-exceedance weights are computed once and reused,
/// and each grid entry is bit-identical to the corresponding single-set call.
pub fn cdf_curve(series: &Series, cfg: &EstimatorConfig, x_grid: &[f64]) -> Result<CdfReport> {
    if x_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Parse("x grid must be ascending".into()));
    }
    let u = threshold(series, cfg.threshold)?;
    let alpha_hat = hill(series, u)?;
    let fwd = forward_terms(series, u, cfg.lag)?;
    let bwd = backward_terms(series, u, cfg.lag, alpha_hat)?;
    let proj_hat = projection_terms(series, u, cfg.block_half_width, cfg.lag, alpha_hat)?;
    let proj_known = match cfg.alpha_mode {
        AlphaMode::Known(alpha) => Some(projection_terms(
            series,
            u,
            cfg.block_half_width,
            cfg.lag,
            alpha,
        )?),
        AlphaMode::HillEstimated => None,
    };
    let mut report = CdfReport {
        x: x_grid.to_vec(),
        forward: Vec::with_capacity(x_grid.len()),
        backward: Vec::with_capacity(x_grid.len()),
        projection_hat: Vec::with_capacity(x_grid.len()),
        projection: proj_known.as_ref().map(|_| Vec::with_capacity(x_grid.len())),
        u_n: u,
        alpha_hat,
        exceedances: fwd.count,
    };
    for &x in x_grid {
        let set = IntervalSet::Le(x);
        report.forward.push(eval_forward(&fwd, set));
        report.backward.push(eval_backward(&bwd, set));
        report.projection_hat.push(eval_projection(&proj_hat, set));
        if let (Some(col), Some(terms)) = (report.projection.as_mut(), proj_known.as_ref()) {
            col.push(eval_projection(terms, set));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn series(values: Vec<f64>) -> Series {
        Series::new(values).unwrap()
    }

    fn padded(values: Vec<f64>, pad: usize) -> Series {
        Series::with_padding(values, pad).unwrap()
    }

    #[test]
    fn threshold_order_statistic() {
        let s = series((1..=100).map(|k| k as f64).collect());
        let u = threshold(&s, ThresholdRule::Quantile(0.95)).unwrap();
        assert_eq!(u, 95.0);
        assert_eq!(s.exceedances(u).unwrap().len(), 5);
        assert_eq!(threshold(&s, ThresholdRule::Absolute(10.0)).unwrap(), 10.0);
    }

    #[test]
    fn threshold_degenerate_on_constant_series() {
        let s = series(vec![3.0; 50]);
        assert!(matches!(
            threshold(&s, ThresholdRule::Quantile(0.95)),
            Err(Error::DegenerateThreshold)
        ));
    }

    #[test]
    fn hill_closed_forms() {
        let e = std::f64::consts::E;
        let mut values = vec![0.5; 40];
        values.extend([2.0 * e, 2.0 * e, 2.0 * e]);
        let s = series(values);
        // every log-excess is exactly 1
        assert!((hill(&s, 2.0).unwrap() - 1.0).abs() < 1e-12);

        let mut values = vec![0.5; 40];
        values.push(2.0 * e.powf(1.0 / 3.0));
        let s = series(values);
        assert!((hill(&s, 2.0).unwrap() - 3.0).abs() < 1e-12);

        assert!(matches!(hill(&s, 100.0), Err(Error::DegenerateThreshold)));
    }

    #[test]
    fn forward_single_and_double_exceedance() {
        // one exceedance at t with ratio 0.5
        let s = padded(vec![0.0, 0.0, 4.0, 2.0, 0.0], 1);
        assert_eq!(forward(&s, 3.0, 1, IntervalSet::Le(1.0)).unwrap(), 1.0);
        assert_eq!(forward(&s, 3.0, 1, IntervalSet::Le(0.4)).unwrap(), 0.0);

        // two exceedances with ratios -0.2 and 0.7
        let mut values = vec![0.0; 32];
        values[10] = 100.0;
        values[11] = -20.0;
        values[20] = -100.0;
        values[21] = 70.0;
        let s = padded(values, 2);
        assert_eq!(forward(&s, 80.0, 1, IntervalSet::Le(0.0)).unwrap(), 0.5);
        assert_eq!(forward(&s, 80.0, 1, IntervalSet::All).unwrap(), 1.0);
    }

    #[test]
    fn backward_single_term_and_zero_convention() {
        // x_{t-1} = 1, x_t = 4, u = 2: indicator at 4, weight (1/4)^alpha
        let s = padded(vec![0.5, 1.0, 4.0, 0.5], 1);
        let got = backward(&s, 2.0, 1, IntervalSet::Gt(3.0), 1.0).unwrap();
        assert_eq!(got, 0.25);
        // zero lagged value: zero summand whatever the set
        let s = padded(vec![0.5, 0.0, 4.0, 0.5], 1);
        assert_eq!(backward(&s, 2.0, 1, IntervalSet::All, 1.0).unwrap(), 0.0);
        assert_eq!(backward(&s, 2.0, 1, IntervalSet::Le(0.0), 1.0).unwrap(), 0.0);
    }

    fn random_series(rng: &mut Rng, n: usize) -> Vec<f64> {
        // heavy-ish tails so exceedances exist
        (0..n)
            .map(|_| {
                let u = rng.uniform_open();
                rng.sign() * u.powf(-0.4)
            })
            .collect()
    }

    #[test]
    fn backward_equals_forward_at_lag_zero_bitwise() {
        let mut rng = Rng::seed_from(0xabc);
        for _ in 0..100 {
            let s = padded(random_series(&mut rng, 220), 10);
            let u = threshold(&s, ThresholdRule::Quantile(0.9)).unwrap();
            let alpha_hat = hill(&s, u).unwrap();
            for &x in &[-1.5, -0.3, 0.0, 0.8, 2.0] {
                let set = IntervalSet::Le(x);
                let f = forward(&s, u, 0, set).unwrap();
                let b = backward(&s, u, 0, set, alpha_hat).unwrap();
                assert_eq!(f.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn projection_weights_are_a_partition_of_unity() {
        let mut rng = Rng::seed_from(0xdef);
        for _ in 0..20 {
            let s = padded(random_series(&mut rng, 160), 8);
            let u = threshold(&s, ThresholdRule::Quantile(0.9)).unwrap();
            let got = projection(&s, u, 5, 2, 1.7, IntervalSet::All).unwrap();
            assert!((got - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_self_ratios_at_lag_zero() {
        // nonnegative series: every in-window ratio x_t/|x_t| = 1 <= 1, and
        // the outside-lag set is empty at lag 0
        let values: Vec<f64> = (0..40).map(|k| (k % 7) as f64).collect();
        let s = padded(values, 4);
        let u = threshold(&s, ThresholdRule::Quantile(0.8)).unwrap();
        let got = projection(&s, u, 3, 0, 2.0, IntervalSet::Le(1.0)).unwrap();
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_two_block_toy_value() {
        // zeros everywhere except x_5 = 1, x_6 = -10; both exceed u = 0.5
        let mut values = vec![0.0; 12];
        values[5] = 1.0;
        values[6] = -10.0;
        let s = padded(values, 3);
        let got = projection(&s, 0.5, 2, 1, 1.0, IntervalSet::Le(-5.0)).unwrap();
        // each block contributes 1/11, averaged over two exceedances
        assert!((got - 1.0 / 11.0).abs() < 1e-15, "{got}");
    }

    #[test]
    fn projection_reduces_to_forward_at_s0_lag0() {
        let mut rng = Rng::seed_from(0x11);
        for _ in 0..50 {
            let s = padded(random_series(&mut rng, 120), 4);
            let u = threshold(&s, ThresholdRule::Quantile(0.85)).unwrap();
            for &x in &[-1.0, 0.0, 1.2] {
                let set = IntervalSet::Le(x);
                let p = projection(&s, u, 0, 0, 2.3, set).unwrap();
                let f = forward(&s, u, 0, set).unwrap();
                assert_eq!(p.to_bits(), f.to_bits());
            }
        }
    }

    #[test]
    fn projection_hat_composes_hill_with_projection() {
        // one exceedance at u*e makes the Hill estimate 1 up to rounding
        let mut values = vec![0.5; 30];
        values[15] = 2.0 * std::f64::consts::E;
        let s = padded(values, 4);
        let u = 2.0;
        let alpha_hat = hill(&s, u).unwrap();
        assert!((alpha_hat - 1.0).abs() < 1e-12);
        for &x in &[-0.5, 0.3, 1.0] {
            let set = IntervalSet::Le(x);
            let composed = projection_hat(&s, u, 3, 1, set).unwrap();
            // bitwise against the explicit composition
            assert_eq!(
                composed.to_bits(),
                projection(&s, u, 3, 1, alpha_hat, set).unwrap().to_bits()
            );
            // and within rounding of the known-index value
            let known = projection(&s, u, 3, 1, 1.0, set).unwrap();
            assert!((composed - known).abs() < 1e-12);
        }
        assert!((projection_hat(&s, u, 3, 1, IntervalSet::All).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_invariance() {
        let mut rng = Rng::seed_from(0x77);
        let values = random_series(&mut rng, 200);
        let s = padded(values.clone(), 10);
        let u = threshold(&s, ThresholdRule::Quantile(0.9)).unwrap();
        let c = 37.5;
        let scaled = padded(values.iter().map(|v| c * v).collect(), 10);
        let set = IntervalSet::Le(0.4);
        let alpha_hat = hill(&s, u).unwrap();
        let alpha_hat_scaled = hill(&scaled, c * u).unwrap();
        assert!((alpha_hat - alpha_hat_scaled).abs() < 1e-12 * alpha_hat);
        let pairs = [
            (forward(&s, u, 1, set).unwrap(), forward(&scaled, c * u, 1, set).unwrap()),
            (
                backward(&s, u, 1, set, alpha_hat).unwrap(),
                backward(&scaled, c * u, 1, set, alpha_hat_scaled).unwrap(),
            ),
            (
                projection(&s, u, 5, 1, 2.0, set).unwrap(),
                projection(&scaled, c * u, 5, 1, 2.0, set).unwrap(),
            ),
            (
                projection_hat(&s, u, 5, 1, set).unwrap(),
                projection_hat(&scaled, c * u, 5, 1, set).unwrap(),
            ),
        ];
        for (a, b) in pairs {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn padding_violations_are_reported() {
        let s = padded(vec![1.0, 5.0, 1.0], 1);
        assert!(matches!(
            forward(&s, 2.0, 2, IntervalSet::All),
            Err(Error::PaddingViolation { .. })
        ));
        assert!(matches!(
            projection(&s, 2.0, 3, 0, 1.0, IntervalSet::All),
            Err(Error::PaddingViolation { .. })
        ));
    }

    #[test]
    fn cdf_curve_matches_single_calls_bitwise() {
        let mut rng = Rng::seed_from(0x3333);
        let s = padded(random_series(&mut rng, 300), 12);
        let cfg = EstimatorConfig {
            threshold: ThresholdRule::Quantile(0.9),
            block_half_width: 6,
            lag: 2,
            alpha_mode: AlphaMode::Known(1.8),
        };
        let grid: Vec<f64> = (-200..=200).map(|k| k as f64 / 100.0).collect();
        let report = cdf_curve(&s, &cfg, &grid).unwrap();
        let u = report.u_n;
        let alpha_hat = report.alpha_hat;
        for (j, &x) in grid.iter().enumerate() {
            let set = IntervalSet::Le(x);
            assert_eq!(
                report.forward[j].to_bits(),
                forward(&s, u, 2, set).unwrap().to_bits()
            );
            assert_eq!(
                report.backward[j].to_bits(),
                backward(&s, u, 2, set, alpha_hat).unwrap().to_bits()
            );
            assert_eq!(
                report.projection_hat[j].to_bits(),
                projection_hat(&s, u, 6, 2, set).unwrap().to_bits()
            );
            assert_eq!(
                report.projection.as_ref().unwrap()[j].to_bits(),
                projection(&s, u, 6, 2, 1.8, set).unwrap().to_bits()
            );
        }
        // cdf columns are monotone in x
        for col in [&report.forward, &report.backward, &report.projection_hat] {
            for w in col.windows(2) {
                assert!(w[1] >= w[0]);
            }
        }
        assert_eq!(*report.forward.last().unwrap(), 1.0);
    }
}
