//! Simulators for three heavy-tailed benchmark models and samplers of their
//! forward tail processes.
//!
//! * `GarchT` — GARCH(1,1) with unit-variance Student t(4) innovations,
//!   `sigma_t^2 = 0.1 + 0.14 X_{t-1}^2 + 0.84 sigma_{t-1}^2`, tail index 2.6.
//! * `Sre` — stochastic recurrence `X_t = C_t X_{t-1} + D_t` with independent
//!   `C ~ N(1/3, 8/9)` and `D ~ N(-10, 1)`, tail index 2.
//! * `Sv` — log-AR(1) stochastic volatility with t(2.6) innovations, tail
//!   index 2.6 and a degenerate tail process (`Theta_i = 0` for `i != 0`).
//!
//! All randomness flows through [`crate::rng::Rng`]; a `(model, seed)` pair
//! reproduces the same stream on every platform. Ten-value prefixes are
//! pinned under `fixtures/`.

use std::sync::OnceLock;

use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, MonotoneCubic};
use crate::rng::Rng;
use crate::spectral::Path;

/// GARCH(1,1) recursion coefficients and the tail index they induce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchTParams {
    pub omega: f64,
    pub arch: f64,
    pub garch: f64,
    pub alpha: f64,
}

impl Default for GarchTParams {
    fn default() -> Self {
        GarchTParams { omega: 0.1, arch: 0.14, garch: 0.84, alpha: 2.6 }
    }
}

/// Parameters of the stochastic recurrence equation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SreParams {
    pub c_mean: f64,
    pub c_sd: f64,
    pub d_mean: f64,
    pub d_sd: f64,
    pub alpha: f64,
}

impl Default for SreParams {
    fn default() -> Self {
        SreParams {
            c_mean: 1.0 / 3.0,
            c_sd: (8.0_f64 / 9.0).sqrt(),
            d_mean: -10.0,
            d_sd: 1.0,
            alpha: 2.0,
        }
    }
}

/// Parameters of the stochastic volatility model; the innovation dof is also
/// the tail index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvParams {
    pub ar: f64,
    pub dof: f64,
}

impl Default for SvParams {
    fn default() -> Self {
        SvParams { ar: 0.9, dof: 2.6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    GarchT(GarchTParams),
    Sre(SreParams),
    Sv(SvParams),
}

impl Model {
    pub fn garcht() -> Self {
        Model::GarchT(GarchTParams::default())
    }

    pub fn sre() -> Self {
        Model::Sre(SreParams::default())
    }

    pub fn sv() -> Self {
        Model::Sv(SvParams::default())
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "garcht" => Ok(Model::garcht()),
            "sre" => Ok(Model::sre()),
            "sv" => Ok(Model::sv()),
            other => Err(Error::Parse(format!(
                "unknown model `{other}` (expected garcht, sre or sv)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::GarchT(_) => "garcht",
            Model::Sre(_) => "sre",
            Model::Sv(_) => "sv",
        }
    }

    /// Tail index of the stationary solution.
    pub fn alpha(&self) -> f64 {
        match self {
            Model::GarchT(p) => p.alpha,
            Model::Sre(p) => p.alpha,
            Model::Sv(p) => p.dof,
        }
    }
}

/// A model with a seed and an optional burn-in override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub model: Model,
    pub seed: u64,
    pub burn_in: Option<usize>,
}

impl ModelSpec {
    pub fn new(model: Model, seed: u64) -> Self {
        ModelSpec { model, seed, burn_in: None }
    }

    /// Contraction-rate based defaults: 1000 for the volatility recursions,
    /// 200 for the fast-mixing recurrence equation.
    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(match self.model {
            Model::GarchT(_) | Model::Sv(_) => 1000,
            Model::Sre(_) => 200,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Draws a stationary-regime sample path of the given length. Deterministic
/// in `(model, seed, burn_in)`; the caller asks for the total length it
/// needs, padding included.
pub fn simulate(spec: &ModelSpec, length: usize) -> Vec<f64> {
    let mut rng = Rng::seed_from(spec.seed);
    let burn = spec.burn_in();
    let total = burn + length;
    let mut out = Vec::with_capacity(length);
    match spec.model {
        Model::GarchT(p) => {
            // start sigma^2 at its stationary mean omega / (1 - arch - garch)
            let mut var = p.omega / (1.0 - p.arch - p.garch);
            for t in 0..total {
                let eps = rng.student_t4_unit_var();
                let x = var.sqrt() * eps;
                if t >= burn {
                    out.push(x);
                }
                var = p.omega + p.arch * x * x + p.garch * var;
            }
        }
        Model::Sre(p) => {
            // start at the stationary mean E[D] / (1 - E[C])
            let mut x = p.d_mean / (1.0 - p.c_mean);
            for t in 0..total {
                let c = rng.gaussian_with(p.c_mean, p.c_sd);
                let d = rng.gaussian_with(p.d_mean, p.d_sd);
                x = c * x + d;
                if t >= burn {
                    out.push(x);
                }
            }
        }
        Model::Sv(p) => {
            let quantile = student_quantile(p.dof);
            let mut log_sigma = 0.0;
            for t in 0..total {
                log_sigma = p.ar * log_sigma + rng.gaussian();
                let eps = quantile.sample(&mut rng);
                if t >= burn {
                    out.push(log_sigma.exp() * eps);
                }
            }
        }
    }
    out
}

/// Streams `count` forward tail paths `(Theta_0 .. Theta_m)`; `buf[t]`
/// holds `Theta_t` when the callback runs.
fn for_each_tail_path(
    model: &Model,
    horizon: usize,
    count: usize,
    seed: u64,
    mut visit: impl FnMut(&[f64]),
) {
    let mut rng = Rng::seed_from(seed);
    let mut buf = vec![0.0; horizon + 1];
    match model {
        Model::GarchT(p) => {
            let tilted = tilted_epsilon_sampler(p.alpha);
            for _ in 0..count {
                // eps0 from the size-biased innovation law, later eps iid t(4)
                let eps0 = tilted.sample(&mut rng);
                let mag0 = eps0.abs();
                buf[0] = eps0 / mag0;
                let mut prod = 1.0;
                let mut prev = eps0;
                for slot in buf.iter_mut().skip(1) {
                    prod *= (p.arch * prev * prev + p.garch).sqrt();
                    prev = rng.student_t4_unit_var();
                    *slot = prev * prod / mag0;
                }
                visit(&buf);
            }
        }
        Model::Sre(p) => {
            for _ in 0..count {
                let theta0 = rng.sign();
                buf[0] = theta0;
                let mut prod = 1.0;
                for slot in buf.iter_mut().skip(1) {
                    prod *= rng.gaussian_with(p.c_mean, p.c_sd);
                    *slot = theta0 * prod;
                }
                visit(&buf);
            }
        }
        Model::Sv(_) => {
            for slot in buf.iter_mut().skip(1) {
                *slot = 0.0;
            }
            for _ in 0..count {
                buf[0] = rng.sign();
                visit(&buf);
            }
        }
    }
}

/// Samples `count` forward tail paths as [`Path`] values. `Theta_0` always
/// has modulus 1.
pub fn sample_tail_theta(spec: &ModelSpec, horizon: usize, count: usize, seed: u64) -> Vec<Path> {
    let mut out = Vec::with_capacity(count);
    for_each_tail_path(&spec.model, horizon, count, seed, |theta| {
        out.push(Path::from_zero(theta.to_vec()).expect("theta_0 is nonzero"));
    });
    out
}

/// An empirical reference cdf on a grid.
#[derive(Debug, Clone)]
pub struct ReferenceCdf {
    pub x: Vec<f64>,
    pub cdf: Vec<f64>,
    pub samples: usize,
    /// Conditioning events, for the pre-asymptotic variant.
    pub events: Option<usize>,
}

fn empirical_cdf(x_grid: &[f64], values: impl Iterator<Item = f64>) -> (Vec<f64>, usize) {
    let mut counts = vec![0u64; x_grid.len() + 1];
    let mut n = 0usize;
    for v in values {
        let idx = x_grid.partition_point(|&x| x < v);
        counts[idx] += 1;
        n += 1;
    }
    let mut acc = 0u64;
    let mut cdf = Vec::with_capacity(x_grid.len());
    for &c in counts.iter().take(x_grid.len()) {
        acc += c;
        cdf.push(acc as f64 / n as f64);
    }
    (cdf, n)
}

/// Monte Carlo cdf of `Theta_i` over `samples` tail-path draws; the reference
/// curve for the limit target. Forward lags only (`i >= 1`).
pub fn mc_true_cdf(spec: &ModelSpec, i: i32, x_grid: &[f64], samples: usize) -> Result<ReferenceCdf> {
    if i < 1 {
        return Err(Error::Parse(format!(
            "reference cdf needs a forward lag (i >= 1), got {i}"
        )));
    }
    let mut values = Vec::with_capacity(samples);
    for_each_tail_path(&spec.model, i as usize, samples, spec.seed, |theta| {
        values.push(theta[i as usize]);
    });
    let (cdf, n) = empirical_cdf(x_grid, values.into_iter());
    Ok(ReferenceCdf { x: x_grid.to_vec(), cdf, samples: n, events: None })
}

/// Empirical conditional cdf of `X_i / |X_0|` given `|X_0| > u`, from a
/// stationary simulation of length `samples`; the reference curve for the
/// pre-asymptotic target.
pub fn pre_asymptotic_cdf(
    spec: &ModelSpec,
    u: f64,
    i: i32,
    x_grid: &[f64],
    samples: usize,
) -> Result<ReferenceCdf> {
    if i < 0 {
        return Err(Error::Parse("pre-asymptotic cdf needs a lag i >= 0".into()));
    }
    let series = simulate(spec, samples + i as usize);
    let ratios = (0..samples).filter_map(|t| {
        let x0 = series[t];
        (x0.abs() > u).then(|| series[t + i as usize] / x0.abs())
    });
    let (cdf, events) = empirical_cdf(x_grid, ratios);
    if events < 10 {
        return Err(Error::TooFewExceedances { got: events, need: 10 });
    }
    Ok(ReferenceCdf { x: x_grid.to_vec(), cdf, samples, events: Some(events) })
}

// ---------------------------------------------------------------------------
// Student t quantiles and the size-biased innovation sampler
// ---------------------------------------------------------------------------

/// Inverse cdf of Student's t built once as a monotone spline (1e5 knots,
/// accuracy well below 1e-9 over its domain) with an exact Newton fallback in
/// the extreme tails.
pub struct StudentQuantile {
    dist: StudentsT,
    spline: MonotoneCubic,
    u_hi: f64,
}

const QUANTILE_KNOTS: usize = 100_000;
const TAIL_MASS: f64 = 1e-7;

impl StudentQuantile {
    pub fn new(dof: f64) -> Self {
        let dist = StudentsT::new(0.0, 1.0, dof).expect("valid dof");
        // knots along x in [0, x_hi] where the survivor drops to TAIL_MASS,
        // graded cubically so the bulk near 0 is densest
        let x_hi = newton_tail_quantile(&dist, TAIL_MASS, 1.0);
        let mut us = Vec::with_capacity(QUANTILE_KNOTS + 1);
        let mut xs = Vec::with_capacity(QUANTILE_KNOTS + 1);
        let mut ds = Vec::with_capacity(QUANTILE_KNOTS + 1);
        let mut last_u = f64::NEG_INFINITY;
        for k in 0..=QUANTILE_KNOTS {
            let x = x_hi * (k as f64 / QUANTILE_KNOTS as f64).powi(3);
            let u = dist.cdf(x);
            if u <= last_u {
                continue;
            }
            last_u = u;
            us.push(u);
            xs.push(x);
            ds.push(1.0 / dist.pdf(x));
        }
        let u_hi = *us.last().unwrap();
        let spline = MonotoneCubic::new(us, xs, Some(ds));
        StudentQuantile { dist, spline, u_hi }
    }

    /// Quantile at `u in (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u == 0.5 {
            return 0.0;
        }
        let (upper, flip) = if u > 0.5 { (u, 1.0) } else { (1.0 - u, -1.0) };
        let x = if upper <= self.u_hi {
            self.spline.eval(upper)
        } else {
            newton_tail_quantile(&self.dist, 1.0 - upper, self.spline.domain().1)
        };
        flip * x
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        self.quantile(rng.uniform_open().min(1.0 - 1e-16))
    }
}

/// Solves `sf(x) = s` for small `s`, starting from the power-law tail guess.
fn newton_tail_quantile(dist: &StudentsT, s: f64, lower: f64) -> f64 {
    let dof = dist.freedom();
    // survivor ~ k * x^(-dof); calibrate k at a moderate quantile
    let x_ref = 10.0;
    let k = dist.sf(x_ref) * x_ref.powf(dof);
    let mut x = (k / s).powf(1.0 / dof).max(lower);
    for _ in 0..60 {
        let diff = dist.sf(x) - s;
        let step = diff / dist.pdf(x);
        x += step;
        if step.abs() <= 1e-12 * x.abs() {
            break;
        }
    }
    x
}

fn student_quantile(dof: f64) -> &'static StudentQuantile {
    static DEFAULT: OnceLock<StudentQuantile> = OnceLock::new();
    static FALLBACK: OnceLock<StudentQuantile> = OnceLock::new();
    if dof == 2.6 {
        DEFAULT.get_or_init(|| StudentQuantile::new(2.6))
    } else {
        // one non-default dof per process is enough for every current caller
        let q = FALLBACK.get_or_init(|| StudentQuantile::new(dof));
        assert!(
            (q.dist.freedom() - dof).abs() < 1e-12,
            "mixed non-default t dofs in one process"
        );
        q
    }
}

/// Sampler for the size-biased innovation `eps~_0` of the GARCHt tail
/// process, with density proportional to `f_eps(x) |x|^alpha` where `f_eps`
/// is the unit-variance t(4) density.
///
/// The magnitude law is tabulated on `[0, 50]` by adaptive quadrature
/// (truncation and interpolation error below 1e-8 of total mass) and inverted
/// through a monotone spline; the sign is symmetric.
pub struct TiltedEpsilonSampler {
    spline: MonotoneCubic,
    head_u: f64,
    head_x: f64,
    head_exp: f64,
    /// Normalizing constant of the magnitude density on [0, 50].
    pub half_mass: f64,
}

const TILT_UPPER: f64 = 50.0;
const TILT_KNOTS: usize = 4096;

/// Unit-variance t(4) density.
pub fn t4_unit_var_pdf(x: f64) -> f64 {
    static T4: OnceLock<StudentsT> = OnceLock::new();
    let t4 = T4.get_or_init(|| StudentsT::new(0.0, 1.0, 4.0).expect("t4"));
    let s = std::f64::consts::SQRT_2;
    s * t4.pdf(s * x)
}

impl TiltedEpsilonSampler {
    pub fn new(alpha: f64) -> Self {
        let density = move |x: f64| t4_unit_var_pdf(x) * x.powf(alpha);
        let mut xs = Vec::with_capacity(TILT_KNOTS + 1);
        let mut cum = Vec::with_capacity(TILT_KNOTS + 1);
        let mut acc = 0.0;
        xs.push(0.0);
        cum.push(0.0);
        for k in 1..=TILT_KNOTS {
            let x = TILT_UPPER * (k as f64 / TILT_KNOTS as f64).powi(2);
            acc += adaptive_simpson(&density, xs[k - 1], x, 1e-13);
            xs.push(x);
            cum.push(acc);
        }
        let half_mass = acc;
        // head interval inverted by the exact leading power x^(alpha+1)
        let head_u = cum[1] / half_mass;
        let head_x = xs[1];
        let us: Vec<f64> = cum.iter().skip(1).map(|c| c / half_mass).collect();
        let xs_tail: Vec<f64> = xs[1..].to_vec();
        let ds: Vec<f64> = xs_tail.iter().map(|&x| half_mass / density(x)).collect();
        let spline = MonotoneCubic::new(us, xs_tail, Some(ds));
        TiltedEpsilonSampler {
            spline,
            head_u,
            head_x,
            head_exp: 1.0 / (alpha + 1.0),
            half_mass,
        }
    }

    /// Magnitude quantile at `u in [0, 1)`.
    pub fn magnitude_quantile(&self, u: f64) -> f64 {
        if u <= self.head_u {
            self.head_x * (u / self.head_u).powf(self.head_exp)
        } else {
            self.spline.eval(u)
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let u = rng.uniform();
        let sign = rng.sign();
        sign * self.magnitude_quantile(u)
    }
}

fn tilted_epsilon_sampler(alpha: f64) -> &'static TiltedEpsilonSampler {
    static DEFAULT: OnceLock<TiltedEpsilonSampler> = OnceLock::new();
    static FALLBACK: OnceLock<TiltedEpsilonSampler> = OnceLock::new();
    if alpha == 2.6 {
        DEFAULT.get_or_init(|| TiltedEpsilonSampler::new(2.6))
    } else {
        FALLBACK.get_or_init(|| TiltedEpsilonSampler::new(alpha))
    }
}
