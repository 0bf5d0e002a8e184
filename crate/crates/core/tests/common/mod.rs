#![allow(dead_code)]

//! Independent reference implementations used only by the tests: densities
//! integrated numerically, quantiles by bisection, and a dense
//! explicit-inverse weighted least-squares solve.

pub mod props;
pub mod tuning;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 60)
}

/// `ln Gamma(m / 2)` by the half-integer recurrence from `Gamma(1) = 1`
/// and `Gamma(1/2) = sqrt(pi)`.
pub fn ln_gamma_half(m: u64) -> f64 {
    assert!(m >= 1);
    let (mut x, mut acc) = if m % 2 == 0 { (1.0, 0.0) } else { (0.5, 0.5 * PI.ln()) };
    let target = m as f64 / 2.0;
    while x < target - 1e-9 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    let half = integrate(&normal_pdf, 0.0, x.abs(), 1e-14);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

pub fn t_pdf(t: f64, df: u64) -> f64 {
    let nu = df as f64;
    let ln_c = ln_gamma_half(df + 1) - ln_gamma_half(df) - 0.5 * (nu * PI).ln();
    (ln_c - 0.5 * (nu + 1.0) * (1.0 + t * t / nu).ln()).exp()
}

pub fn t_cdf(t: f64, df: u64) -> f64 {
    let f = move |u: f64| t_pdf(u, df);
    let half = integrate(&f, 0.0, t.abs(), 1e-14);
    if t >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

pub fn chi2_pdf(x: f64, df: u64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = df as f64 / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * 2f64.ln() - ln_gamma_half(df)).exp()
}

/// Integrated after substituting `x = u^2`, which removes the singularity
/// at zero for one degree of freedom.
pub fn chi2_cdf(x: f64, df: u64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = df as f64 / 2.0;
    let ln_c = -k * 2f64.ln() - ln_gamma_half(df);
    let f = move |u: f64| {
        if u == 0.0 {
            return if df == 1 { 2.0 * ln_c.exp() } else { 0.0 };
        }
        (ln_c + (2.0 * k - 1.0) * u.ln() - u * u / 2.0).exp() * 2.0
    };
    integrate(&f, 0.0, x.sqrt(), 1e-14)
}

/// Bisection for `cdf(x) = p` on a bracket that is widened as needed.
pub fn bisect_quantile(cdf: &dyn Fn(f64) -> f64, p: f64, mut lo: f64, mut hi: f64) -> f64 {
    while cdf(lo) > p {
        lo -= (hi - lo).max(1.0);
    }
    while cdf(hi) < p {
        hi += (hi - lo).max(1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn normal_quantile(p: f64) -> f64 {
    bisect_quantile(&normal_cdf, p, -10.0, 10.0)
}

pub fn t_quantile(p: f64, df: u64) -> f64 {
    bisect_quantile(&|t| t_cdf(t, df), p, -20.0, 20.0)
}

pub fn chi2_quantile(p: f64, df: u64) -> f64 {
    bisect_quantile(&|x| chi2_cdf(x, df), p, 0.0, 2.0 * df as f64 + 10.0)
}

/// `(X^T W X)^{-1} X^T W y` with an explicit dense inverse.
pub fn dense_wls(x: &DMatrix<f64>, w: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let wm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    let xtw = x.transpose() * wm;
    let inv = (&xtw * x).try_inverse()?;
    Some((inv * xtw * DVector::from_column_slice(y)).as_slice().to_vec())
}

/// Sample Spearman rank correlation (no tie correction).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
