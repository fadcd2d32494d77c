//! Shift-and-rescale transform on discrete path laws.
//!
//! The transform maps a law of shapes into the law of a valid spectral tail
//! process: every output atom is anchored (modulus 1 at time 0), the transform
//! is idempotent, and its fixed points satisfy the time-change identity. The
//! checks in this module are exact finite sums over atoms.

use crate::error::{Error, Result};
use crate::spectral::{IntervalSet, Path, SpectralLaw};

/// Pushforward of a discrete law under the shift-and-rescale mixture.
///
/// Each atom `w` with probability `q` contributes, for every time `j` in its
/// support, the atom `shift_scale(w, j)` with weight
/// `q * |w_j|^alpha / sum_k |w_k|^alpha`. Duplicates are merged.
pub fn rs_transform(law: &SpectralLaw) -> SpectralLaw {
    let alpha = law.alpha();
    let mut atoms = Vec::new();
    for (path, prob) in law.atoms() {
        let denom = path.alpha_pow_sum(alpha);
        for j in path.support() {
            let weight = prob * path.value_at(j).abs().powf(alpha) / denom;
            let shifted = path.shift_scale(j).expect("support value is nonzero");
            atoms.push((shifted, weight));
        }
    }
    SpectralLaw::new(atoms, alpha).expect("pushforward preserves unit mass")
}

/// Result of an invariance check: the exact total-variation distance between
/// a law and its transform, and whether it is below the requested tolerance.
#[derive(Debug, Clone, Copy)]
pub struct InvarianceCheck {
    pub tv: f64,
    pub invariant: bool,
}

/// Tests `law = rs_transform(law)` in total variation.
pub fn is_rs_invariant(law: &SpectralLaw, tol: f64) -> InvarianceCheck {
    let tv = law.total_variation(&rs_transform(law));
    InvarianceCheck { tv, invariant: tv <= tol }
}

/// Marginal probability of `{x_i in set}` under the transform of `law`,
/// evaluated as a weighted sum over the *input* atoms:
/// `E[ sum_h |w_h|^alpha / ||w||_alpha^alpha * 1{w_{h+i}/|w_h| in set} ]`.
///
/// For an invariant law this equals `law.marginal_prob(i, set)`; the two
/// routes are algebraically independent and used to cross-check each other.
pub fn rs_marginal(law: &SpectralLaw, i: i32, set: IntervalSet) -> f64 {
    let alpha = law.alpha();
    let mut total = 0.0;
    for (path, prob) in law.atoms() {
        let denom = path.alpha_pow_sum(alpha);
        let mut inner = 0.0;
        for h in path.support() {
            let pivot = path.value_at(h).abs();
            inner += pivot.powf(alpha) * set.indicator(path.value_at(h + i) / pivot);
        }
        total += prob * inner / denom;
    }
    total
}

/// Indicator functional `f(w) = 1{w_0 != 0} * 1{w_lag in set}`, the family
/// used throughout the time-change checks. Such functionals vanish on paths
/// with value 0 at time 0, as the time-change identity requires.
pub fn indicator_functional(lag: i32, set: IntervalSet) -> impl Fn(&Path) -> f64 {
    move |w: &Path| {
        if w.value_at(0) == 0.0 {
            0.0
        } else {
            set.indicator(w.value_at(lag))
        }
    }
}

/// Absolute residual of the time-change identity
/// `E[f((T_{t+i})_t)] = E[f((T_t)_t / |T_{-i}|) * |T_{-i}|^alpha]`
/// evaluated exactly over the atoms of `law`.
///
/// `f` must vanish on paths with value 0 at time 0; the residual computation
/// enforces that contract on every path it feeds to `f` and reports
/// [`Error::ContractViolation`] when it is broken. For an RS-invariant law
/// the residual is 0 up to rounding for every bounded `f`.
pub fn time_change_residual(
    law: &SpectralLaw,
    i: i32,
    f: impl Fn(&Path) -> f64,
) -> Result<f64> {
    let alpha = law.alpha();
    let eval = |w: &Path| -> Result<f64> {
        let y = f(w);
        if w.value_at(0) == 0.0 && y != 0.0 {
            return Err(Error::ContractViolation);
        }
        Ok(y)
    };
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (path, prob) in law.atoms() {
        lhs += prob * eval(&path.shift(i))?;
        let pivot = path.value_at(-i).abs();
        if pivot != 0.0 {
            rhs += prob * eval(&path.scale_by(pivot)?)? * pivot.powf(alpha);
        }
    }
    Ok((lhs - rhs).abs())
}

/// A fixed battery of 20 indicator functionals: lags -2..=2 crossed with
/// four evaluation sets.
pub fn functional_battery() -> Vec<(i32, IntervalSet)> {
    let sets = [
        IntervalSet::Le(-0.5),
        IntervalSet::Le(0.0),
        IntervalSet::Le(0.75),
        IntervalSet::Gt(1.0),
    ];
    let mut out = Vec::with_capacity(20);
    for lag in -2..=2 {
        for set in sets {
            out.push((lag, set));
        }
    }
    out
}

/// Largest time-change residual over `i in -3..=3` and the functional
/// battery; the summary statistic printed by `tailproc verify`.
pub fn max_time_change_residual(law: &SpectralLaw) -> Result<f64> {
    let mut max = 0.0_f64;
    for i in -3..=3 {
        for (lag, set) in functional_battery() {
            let r = time_change_residual(law, i, indicator_functional(lag, set))?;
            max = max.max(r);
        }
    }
    Ok(max)
}

/// Random discrete law for property tests: up to 4 atoms with windows inside
/// `[-3, 3]`, values from `{0} U {+-2^k/8 : k = 0..6}` (near-exact dyadics)
/// and `alpha` in `[0.5, 4]`.
pub fn random_law(rng: &mut crate::rng::Rng) -> SpectralLaw {
    let n_atoms = 1 + (rng.next_u64() % 4) as usize;
    let mut atoms = Vec::with_capacity(n_atoms);
    let mut weights = Vec::with_capacity(n_atoms);
    for _ in 0..n_atoms {
        let len = 1 + (rng.next_u64() % 6) as usize;
        let lo = -((rng.next_u64() % (len as u64).min(4)) as i32);
        let mut values = vec![0.0; len];
        loop {
            for v in values.iter_mut() {
                *v = if rng.next_u64() & 3 == 0 {
                    0.0
                } else {
                    let mag = (1u64 << (rng.next_u64() % 7)) as f64 / 8.0;
                    if rng.next_u64() & 1 == 0 {
                        mag
                    } else {
                        -mag
                    }
                };
            }
            if values.iter().any(|&v| v != 0.0) {
                break;
            }
        }
        atoms.push(Path::new(lo, values).expect("nonzero values"));
        weights.push(1 + rng.next_u64() % 16);
    }
    let total: u64 = weights.iter().sum();
    let alpha = 0.5 + 3.5 * rng.uniform();
    let atoms = atoms
        .into_iter()
        .zip(weights)
        .map(|(p, w)| (p, w as f64 / total as f64))
        .collect();
    SpectralLaw::new(atoms, alpha).expect("weights sum to one")
}
