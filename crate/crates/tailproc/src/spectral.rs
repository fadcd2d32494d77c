//! Finite-support paths and discrete spectral laws.
//!
//! A [`Path`] is a two-sided real sequence that is zero outside a finite
//! window around time 0; a [`SpectralLaw`] is a finitely supported probability
//! distribution over paths together with a tail index `alpha`. Everything is
//! immutable after construction and all operations are pure.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Relative granularity used to collapse nearly identical path values when
/// atoms are merged: values are rounded to 14 significant decimal digits.
fn snap(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0; // also normalizes -0.0
    }
    format!("{v:.13e}").parse().expect("snap round-trip")
}

/// A real sequence with finite support, anchored at time 0.
///
/// The stored window is the smallest interval containing time 0 and every
/// nonzero value; values outside the window are implicitly zero. Two paths
/// are equal iff their windows and stored values coincide exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    lo: i32,
    values: Vec<f64>,
}

impl Eq for Path {}

impl std::hash::Hash for Path {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        // Sound because construction rejects NaN and normalizes -0.0.
        self.lo.hash(state);
        for v in &self.values {
            v.to_bits().hash(state);
        }
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.lo
            .cmp(&other.lo)
            .then_with(|| self.values.len().cmp(&other.values.len()))
            .then_with(|| {
                for (a, b) in self.values.iter().zip(&other.values) {
                    let ord = a.total_cmp(b);
                    if ord != std::cmp::Ordering::Equal {
                        return ord;
                    }
                }
                std::cmp::Ordering::Equal
            })
    }
}

impl Path {
    /// Builds a path from the value at `lo`, `lo+1`, ... The window is
    /// canonicalized: leading and trailing zeros are trimmed except where
    /// needed to keep time 0 inside, and the window is extended to time 0
    /// when the given one does not reach it.
    pub fn new(lo: i32, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("path values"));
        }
        let first_nz = values.iter().position(|&v| v != 0.0).ok_or(Error::ZeroPath)?;
        let last_nz = values.iter().rposition(|&v| v != 0.0).unwrap();
        let new_lo = (lo + first_nz as i32).min(0);
        let new_hi = (lo + last_nz as i32).max(0);
        let mut out = Vec::with_capacity((new_hi - new_lo + 1) as usize);
        for t in new_lo..=new_hi {
            let idx = t - lo;
            let v = if idx >= 0 && (idx as usize) < values.len() {
                values[idx as usize]
            } else {
                0.0
            };
            out.push(if v == 0.0 { 0.0 } else { v });
        }
        Ok(Path { lo: new_lo, values: out })
    }

    /// Convenience constructor for a path supported on `[0, values.len())`.
    pub fn from_zero(values: Vec<f64>) -> Result<Self> {
        Path::new(0, values)
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.values.len() as i32 - 1
    }

    /// Value at time `t`, zero outside the stored window.
    pub fn value_at(&self, t: i32) -> f64 {
        let idx = t - self.lo;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    /// Stored window as `(time, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| (self.lo + k as i32, v))
    }

    /// Times inside the window with a nonzero value.
    pub fn support(&self) -> impl Iterator<Item = i32> + '_ {
        self.iter().filter(|&(_, v)| v != 0.0).map(|(t, _)| t)
    }

    /// `sum_t |v_t|^alpha`.
    pub fn alpha_pow_sum(&self, alpha: f64) -> f64 {
        self.values.iter().map(|v| v.abs().powf(alpha)).sum()
    }

    /// The alpha-norm `(sum_t |v_t|^alpha)^(1/alpha)`; strictly positive.
    pub fn alpha_norm(&self, alpha: f64) -> f64 {
        self.alpha_pow_sum(alpha).powf(1.0 / alpha)
    }

    /// Shifts time so that `j` becomes 0 and divides by `|v_j|`. The result
    /// has a value of modulus 1 at time 0. Fails when `v_j = 0`.
    pub fn shift_scale(&self, j: i32) -> Result<Self> {
        let pivot = self.value_at(j).abs();
        if pivot == 0.0 {
            return Err(Error::ZeroPivot { index: j });
        }
        let scaled: Vec<f64> = self.values.iter().map(|v| v / pivot).collect();
        Path::new(self.lo - j, scaled)
    }

    /// Pure time shift: the value at old time `t + i` moves to time `t`.
    pub fn shift(&self, i: i32) -> Self {
        Path::new(self.lo - i, self.values.clone()).expect("shift preserves support")
    }

    /// Divides every value by `c.abs()`; `c` must be nonzero.
    pub fn scale_by(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::NonFinite("scale factor"));
        }
        let a = c.abs();
        Path::new(self.lo, self.values.iter().map(|v| v / a).collect())
    }

    fn snapped(&self) -> Self {
        Path {
            lo: self.lo,
            values: self.values.iter().map(|&v| snap(v)).collect(),
        }
    }
}

/// One-dimensional evaluation sets: `(-inf, x]`, `(x, inf)`, everything, nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalSet {
    Le(f64),
    Gt(f64),
    All,
    Empty,
}

impl IntervalSet {
    pub fn contains(self, v: f64) -> bool {
        match self {
            IntervalSet::Le(x) => v <= x,
            IntervalSet::Gt(x) => v > x,
            IntervalSet::All => true,
            IntervalSet::Empty => false,
        }
    }

    /// Indicator as a float, the form used in every estimator sum.
    pub fn indicator(self, v: f64) -> f64 {
        if self.contains(v) {
            1.0
        } else {
            0.0
        }
    }

    /// Finite boundary point, if any.
    pub fn boundary(self) -> Option<f64> {
        match self {
            IntervalSet::Le(x) | IntervalSet::Gt(x) => Some(x),
            _ => None,
        }
    }

    /// Parses the command-line grammar `le:<x>`, `gt:<x>`, `all`, `empty`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(IntervalSet::All);
        }
        if s.eq_ignore_ascii_case("empty") {
            return Ok(IntervalSet::Empty);
        }
        let (kind, num) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("bad set `{s}`: expected le:<x>, gt:<x>, all")))?;
        let x: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad set boundary `{num}`")))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "le" => Ok(IntervalSet::Le(x)),
            "gt" => Ok(IntervalSet::Gt(x)),
            other => Err(Error::Parse(format!("unknown set kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntervalSet::Le(x) => write!(f, "le:{x}"),
            IntervalSet::Gt(x) => write!(f, "gt:{x}"),
            IntervalSet::All => write!(f, "all"),
            IntervalSet::Empty => write!(f, "empty"),
        }
    }
}

/// A discrete probability law over paths with a tail index.
///
/// Atoms are deduplicated (values snapped to 14 significant digits, equal
/// paths merged by summing probability) and kept in a canonical order, so
/// two laws built from the same atoms in any order compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLaw {
    atoms: Vec<(Path, f64)>,
    alpha: f64,
}

impl SpectralLaw {
    /// Probability mass may deviate from 1 by at most `1e-9` (the law is then
    /// renormalized); larger deviations are rejected.
    pub fn new(atoms: Vec<(Path, f64)>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::BadAlpha(alpha));
        }
        if atoms.is_empty() {
            return Err(Error::BadProbability("no atoms".into()));
        }
        let mut merged: BTreeMap<Path, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (path, prob) in atoms {
            if !prob.is_finite() {
                return Err(Error::NonFinite("atom probability"));
            }
            if prob < 0.0 {
                return Err(Error::BadProbability(format!("negative probability {prob}")));
            }
            if prob == 0.0 {
                continue;
            }
            total += prob;
            *merged.entry(path.snapped()).or_insert(0.0) += prob;
        }
        if merged.is_empty() {
            return Err(Error::BadProbability("all atoms have zero probability".into()));
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadProbability(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let atoms = merged.into_iter().map(|(p, w)| (p, w / total)).collect();
        Ok(SpectralLaw { atoms, alpha })
    }

    /// Point mass at a single path.
    pub fn point_mass(path: Path, alpha: f64) -> Result<Self> {
        SpectralLaw::new(vec![(path, 1.0)], alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn atoms(&self) -> &[(Path, f64)] {
        &self.atoms
    }

    /// `P{Theta_i in A}`: mass of atoms whose value at time `i` lies in `set`.
    pub fn marginal_prob(&self, i: i32, set: IntervalSet) -> f64 {
        self.atoms
            .iter()
            .map(|(p, w)| w * set.indicator(p.value_at(i)))
            .sum()
    }

    /// Total variation distance to `other`, over the union of atom supports.
    pub fn total_variation(&self, other: &SpectralLaw) -> f64 {
        let mut union: BTreeMap<&Path, (f64, f64)> = BTreeMap::new();
        for (p, w) in &self.atoms {
            union.entry(p).or_insert((0.0, 0.0)).0 += *w;
        }
        for (p, w) in &other.atoms {
            union.entry(p).or_insert((0.0, 0.0)).1 += *w;
        }
        0.5 * union.values().map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Serializes to the line format: a header `alpha=<value>` followed by one
    /// atom `prob lo v_lo ... v_hi` per line. 17 significant digits, so the
    /// round-trip is bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alpha={:.16e}", self.alpha);
        for (p, w) in &self.atoms {
            let _ = write!(out, "{:.16e} {}", w, p.lo);
            for &v in &p.values {
                let _ = write!(out, " {v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`SpectralLaw::to_text`]. Blank lines and
    /// `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut alpha: Option<f64> = None;
        let mut atoms = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("alpha=") {
                alpha = Some(
                    rest.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad alpha", ln + 1)))?,
                );
                continue;
            }
            let mut toks = line.split_whitespace();
            let prob: f64 = toks
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: empty atom", ln + 1)))?
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad probability", ln + 1)))?;
            let lo: i32 = toks
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing lo", ln + 1)))?
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad lo index", ln + 1)))?;
            let values: std::result::Result<Vec<f64>, _> = toks.map(str::parse).collect();
            let values =
                values.map_err(|_| Error::Parse(format!("line {}: bad value", ln + 1)))?;
            atoms.push((Path::new(lo, values)?, prob));
        }
        let alpha = alpha.ok_or_else(|| Error::Parse("missing alpha= header".into()))?;
        SpectralLaw::new(atoms, alpha)
    }
}
