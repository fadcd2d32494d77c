//! Exact asymptotic variances of the tail-process estimators for finitely
//! supported spectral laws.
//!
//! For a discrete RS-invariant law every limit covariance is a finite sum
//! over atoms and lags, so the asymptotic variances of the forward, backward
//! and projection estimators can be evaluated exactly. The limit is driven by
//! a centered Gaussian vector `(Z(A), Z(R), Z_phi)`:
//!
//! * the projection estimator with known index converges to `Z(A) - p_A Z(R)`,
//! * the version with the Hill plug-in to
//!   `Z(A) - (p_A - alpha d_A) Z(R) - alpha^2 d_A Z_phi`,
//! * the backward estimator has its own time-reversed component.
//!
//! Evaluation sets whose boundary carries an atom of the lag marginal are
//! rejected, since the limit distribution is ambiguous there.

use crate::error::{Error, Result};
use crate::numeric::min_eigenvalue_sym3;
use crate::rs::{is_rs_invariant, rs_transform};
use crate::spectral::{IntervalSet, Path, SpectralLaw};

const INVARIANCE_TOL: f64 = 1e-8;

/// Covariance data of the Gaussian limit vector `(Z(A), Z(R), Z_phi)`
/// together with the constants entering the estimator limits.
#[derive(Debug, Clone, Copy)]
pub struct LimitCovariances {
    pub var_z_a: f64,
    pub cov_z_a_z_r: f64,
    pub var_z_r: f64,
    pub cov_z_a_z_phi: f64,
    pub cov_z_r_z_phi: f64,
    pub var_z_phi: f64,
    /// `P{Theta_i in A}`.
    pub p_a: f64,
    /// Sensitivity of the estimator to the plugged-in tail index.
    pub d_a: f64,
}

impl LimitCovariances {
    /// The assembled covariance matrix of `(Z(A), Z(R), Z_phi)`.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.var_z_a, self.cov_z_a_z_r, self.cov_z_a_z_phi],
            [self.cov_z_a_z_r, self.var_z_r, self.cov_z_r_z_phi],
            [self.cov_z_a_z_phi, self.cov_z_r_z_phi, self.var_z_phi],
        ]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue_sym3(self.matrix())
    }

    /// Variance of `c . (Z(A), Z(R), Z_phi)`.
    pub fn quadratic_form(&self, c: [f64; 3]) -> f64 {
        let m = self.matrix();
        let mut v = 0.0;
        for (row, &ci) in m.iter().zip(&c) {
            for (entry, &cj) in row.iter().zip(&c) {
                v += ci * cj * entry;
            }
        }
        v
    }
}

// Per-atom building blocks. Sums over lags run over the finite support; a
// zero value contributes nothing to any of them (its weight factor is 0).

fn chi(path: &Path, alpha: f64) -> f64 {
    path.support()
        .map(|t| path.value_at(t).abs().powf(alpha).min(1.0))
        .sum()
}

fn xi(path: &Path, alpha: f64, lag: i32, set: IntervalSet) -> f64 {
    let denom = path.alpha_pow_sum(alpha);
    let mut tot = 0.0;
    for h in path.support() {
        let pivot = path.value_at(h).abs();
        tot += pivot.powf(alpha) * set.indicator(path.value_at(h + lag) / pivot);
    }
    tot / denom
}

/// `sum_k (|v_k|^alpha ^ 1) (1/alpha + log^+ |v_k|)`, the integrand of the
/// covariance with the log-excess component.
fn psi(path: &Path, alpha: f64) -> f64 {
    path.support()
        .map(|t| {
            let a = path.value_at(t).abs();
            a.powf(alpha).min(1.0) * (1.0 / alpha + a.ln().max(0.0))
        })
        .sum()
}

fn var_phi_integrand(path: &Path, alpha: f64) -> f64 {
    path.support()
        .map(|t| {
            let a = path.value_at(t).abs();
            a.powf(alpha).min(1.0) * (2.0 / alpha + a.ln().abs())
        })
        .sum::<f64>()
        / alpha
}

fn d_a_integrand(path: &Path, alpha: f64, lag: i32, set: IntervalSet) -> f64 {
    if !set.contains(path.value_at(lag)) {
        return 0.0;
    }
    let log_sum: f64 = path
        .support()
        .map(|t| {
            let a = path.value_at(t).abs();
            a.powf(alpha) * a.ln()
        })
        .sum();
    -log_sum / path.alpha_pow_sum(alpha)
}

/// Weight of the anchored time-reversed indicator `|v_{-i}|^alpha *
/// 1{v_0 / |v_{-i}| in set}`, zero when `v_{-i}` vanishes.
fn beta_reversed(path: &Path, alpha: f64, lag: i32, set: IntervalSet) -> f64 {
    let pivot = path.value_at(-lag).abs();
    if pivot == 0.0 {
        return 0.0;
    }
    pivot.powf(alpha) * set.indicator(path.value_at(0) / pivot)
}

fn expectation(law: &SpectralLaw, mut f: impl FnMut(&Path) -> f64) -> f64 {
    law.atoms().iter().map(|(p, w)| w * f(p)).sum()
}

fn validate(law: &SpectralLaw, lag: i32, set: IntervalSet) -> Result<()> {
    let check = is_rs_invariant(law, INVARIANCE_TOL);
    if !check.invariant {
        return Err(Error::NotASpectralLaw { tv: check.tv, tol: INVARIANCE_TOL });
    }
    if let Some(x) = set.boundary() {
        for (p, _) in law.atoms() {
            if p.value_at(lag) == x {
                return Err(Error::BoundaryAtom { x, lag });
            }
        }
    }
    Ok(())
}

/// Variances touched by rounding may come out as tiny negatives; snap those
/// to zero and let anything worse surface.
fn clamp_variance(v: f64) -> f64 {
    if v < 0.0 && v > -1e-12 {
        log::warn!("clamping tiny negative variance {v:.3e} to 0");
        0.0
    } else {
        v
    }
}

/// All limit covariances of `(Z(A), Z(R), Z_phi)` for the given law, lag and
/// set, as exact finite sums over atoms. The law must be RS-invariant.
pub fn limit_covariances(
    law: &SpectralLaw,
    lag: i32,
    set: IntervalSet,
) -> Result<LimitCovariances> {
    validate(law, lag, set)?;
    let alpha = law.alpha();
    Ok(LimitCovariances {
        var_z_a: expectation(law, |p| chi(p, alpha) * xi(p, alpha, lag, set).powi(2)),
        cov_z_a_z_r: expectation(law, |p| chi(p, alpha) * xi(p, alpha, lag, set)),
        var_z_r: expectation(law, |p| chi(p, alpha)),
        cov_z_a_z_phi: expectation(law, |p| xi(p, alpha, lag, set) * psi(p, alpha)),
        cov_z_r_z_phi: expectation(law, |p| psi(p, alpha)),
        var_z_phi: expectation(law, |p| var_phi_integrand(p, alpha)),
        p_a: law.marginal_prob(lag, set),
        d_a: expectation(law, |p| d_a_integrand(p, alpha, lag, set)),
    })
}

/// Asymptotic variance of the projection estimator with estimated index:
/// `Var(Z(A) - (p_A - alpha d_A) Z(R) - alpha^2 d_A Z_phi)`.
pub fn var_projection_hat(law: &SpectralLaw, lag: i32, set: IntervalSet) -> Result<f64> {
    let cov = limit_covariances(law, lag, set)?;
    let alpha = law.alpha();
    let c = [1.0, -(cov.p_a - alpha * cov.d_a), -alpha * alpha * cov.d_a];
    Ok(clamp_variance(cov.quadratic_form(c)))
}

/// Asymptotic variance of the projection estimator with known index:
/// `Var(Z(A) - p_A Z(R))`.
pub fn var_projection_known(law: &SpectralLaw, lag: i32, set: IntervalSet) -> Result<f64> {
    let cov = limit_covariances(law, lag, set)?;
    Ok(clamp_variance(cov.quadratic_form([1.0, -cov.p_a, 0.0])))
}

/// Asymptotic variance of the forward estimator:
/// `sum_j E[(|T_j|^alpha ^ 1)(p_A - 1_A(T_{j+i}/|T_j|))(p_A - 1_A(T_i))]`.
pub fn var_forward(law: &SpectralLaw, lag: i32, set: IntervalSet) -> Result<f64> {
    validate(law, lag, set)?;
    let alpha = law.alpha();
    let p_a = law.marginal_prob(lag, set);
    let v = expectation(law, |path| {
        let outer = p_a - set.indicator(path.value_at(lag));
        let inner: f64 = path
            .support()
            .map(|j| {
                let pivot = path.value_at(j).abs();
                pivot.powf(alpha).min(1.0)
                    * (p_a - set.indicator(path.value_at(j + lag) / pivot))
            })
            .sum();
        outer * inner
    });
    Ok(clamp_variance(v))
}

/// Asymptotic variance of the backward estimator:
/// `Var(Zt(A) - p_A Z(R) + (alpha^2 Z_phi - alpha Z(R)) E[log|T_i| 1_A(T_i)])`
/// with the time-reversed component `Zt`. Fails when the log moment diverges,
/// which happens exactly when the set contains 0 and the lag marginal has
/// mass there.
pub fn var_backward(law: &SpectralLaw, lag: i32, set: IntervalSet) -> Result<f64> {
    validate(law, lag, set)?;
    let alpha = law.alpha();
    let p_a = law.marginal_prob(lag, set);
    if set.contains(0.0) && law.atoms().iter().any(|(p, _)| p.value_at(lag) == 0.0) {
        return Err(Error::DivergentLogMoment { lag });
    }
    let log_moment = expectation(law, |p| {
        let v = p.value_at(lag);
        if v == 0.0 {
            0.0
        } else {
            v.abs().ln() * set.indicator(v)
        }
    });
    let var_zt = expectation(law, |path| {
        let anchor = beta_reversed(path, alpha, lag, set);
        if anchor == 0.0 {
            return 0.0;
        }
        let inner: f64 = path
            .support()
            .map(|j| {
                let vj = path.value_at(j).abs();
                let vrev = path.value_at(j - lag).abs();
                if vrev == 0.0 {
                    return 0.0;
                }
                vj.powf(alpha).min(1.0)
                    * (vrev / vj).powf(alpha)
                    * set.indicator(path.value_at(j) / vrev)
            })
            .sum();
        inner * anchor
    });
    let cov_zt_z_r = expectation(law, |p| chi(p, alpha) * beta_reversed(p, alpha, lag, set));
    let cov_zt_z_phi = expectation(law, |p| psi(p, alpha) * beta_reversed(p, alpha, lag, set));
    let var_z_r = expectation(law, |p| chi(p, alpha));
    let cov_z_r_z_phi = expectation(law, |p| psi(p, alpha));
    let var_z_phi = expectation(law, |p| var_phi_integrand(p, alpha));
    // coefficients: Zt - (p_A + alpha L) Z(R) + alpha^2 L Z_phi
    let q = p_a + alpha * log_moment;
    let r = alpha * alpha * log_moment;
    let v = var_zt + q * q * var_z_r + r * r * var_z_phi - 2.0 * q * r * cov_z_r_z_phi
        - 2.0 * q * cov_zt_z_r
        + 2.0 * r * cov_zt_z_phi;
    Ok(clamp_variance(v))
}

/// The two-shape benchmark law: a mixture of the shapes `(1/a, -1)` (weight
/// `p`) and `(1, 1/b)` (weight `1-p`) pushed through the shift-and-rescale
/// transform at tail index 1. For `p` strictly inside `(0, 1)` it has exactly
/// four atoms with probabilities `pa/(a+1)`, `p/(a+1)`, `(1-p)/(1+b)`,
/// `(1-p)b/(1+b)`.
pub fn example_law(p: f64, a: f64, b: f64) -> Result<SpectralLaw> {
    if !(a > 1.0 && b > 1.0) {
        return Err(Error::Parse(format!("need a > 1 and b > 1, got a={a}, b={b}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parse(format!("mixture weight p must be in [0,1], got {p}")));
    }
    let mut atoms = Vec::new();
    if p > 0.0 {
        atoms.push((Path::from_zero(vec![1.0 / a, -1.0])?, p));
    }
    if p < 1.0 {
        atoms.push((Path::from_zero(vec![1.0, 1.0 / b])?, 1.0 - p));
    }
    Ok(rs_transform(&SpectralLaw::new(atoms, 1.0)?))
}
