//! Small numerical utilities: adaptive quadrature, monotone cubic
//! interpolation, order statistics and a symmetric 3x3 eigenvalue bound.

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Monotone cubic Hermite interpolant (Fritsch-Carlson limited slopes).
///
/// Knots must be strictly increasing in `x`; values must be nondecreasing.
/// Outside the knot range the evaluation clamps to the end values.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant from knots and, optionally, exact derivatives at
    /// the knots; derivatives are limited where they would break monotonicity.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, derivatives: Option<Vec<f64>>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len());
        let n = xs.len();
        let mut secants = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            secants.push((ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]));
        }
        let mut slopes = match derivatives {
            Some(d) => d,
            None => {
                let mut d = vec![0.0; n];
                d[0] = secants[0];
                d[n - 1] = secants[n - 2];
                for k in 1..n - 1 {
                    d[k] = 0.5 * (secants[k - 1] + secants[k]);
                }
                d
            }
        };
        // Fritsch-Carlson: clamp slopes into [0, 3*min(adjacent secants)]
        for k in 0..n {
            let left = if k > 0 { secants[k - 1] } else { secants[0] };
            let right = if k < n - 1 { secants[k] } else { secants[n - 2] };
            if left <= 0.0 || right <= 0.0 {
                slopes[k] = 0.0;
            } else {
                slopes[k] = slopes[k].max(0.0).min(3.0 * left.min(right));
            }
        }
        MonotoneCubic { xs, ys, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            idx => idx - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (y0, y1) = (self.ys[k], self.ys[k + 1]);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * h * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * h * (t3 - t2)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }
}

/// `k`-th order statistic (1-based, ascending) of `values`.
pub fn order_statistic(values: &[f64], k: usize) -> f64 {
    assert!(k >= 1 && k <= values.len());
    let mut v = values.to_vec();
    let (_, kth, _) = v.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

/// Empirical quantile via the ceil(q*n)-th order statistic. A small slack
/// keeps floating products like 0.95*2000 from rounding the rank up.
pub fn quantile_order_statistic(values: &[f64], q: f64) -> f64 {
    let n = values.len();
    let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
    order_statistic(values, rank.min(n))
}

/// Smallest eigenvalue of a symmetric 3x3 matrix (analytic, via the
/// trigonometric solution of the characteristic cubic).
pub fn min_eigenvalue_sym3(m: [[f64; 3]; 3]) -> f64 {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 == 0.0 {
        return m[0][0].min(m[1][1]).min(m[2][2]);
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = m;
    for (i, row) in b.iter_mut().enumerate() {
        row[i] -= q;
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    // eigenvalues are q + 2p cos(phi + 2k pi/3); k = 1 gives the smallest
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
}

/// Mean and population standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
