//! Distribution primitives: standard normal, Student t and chi-square.
//!
//! CDFs are built on the regularized incomplete gamma and beta functions
//! (series and Lentz continued fractions). Quantiles invert those CDFs with a
//! bracketed Newton iteration that falls back to bisection whenever a Newton
//! step would leave the bracket, so every solve stays inside a sign-change
//! interval.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Absolute tolerance on the abscissa for every quantile solve.
pub const QUANTILE_TOLERANCE: f64 = 1e-10;
/// Iteration cap for quantile solves.
pub const QUANTILE_MAX_ITER: usize = 200;

const SPECIAL_EPS: f64 = 1e-16;
const SPECIAL_MAX_ITER: usize = 100_000;
const FPMIN: f64 = 1e-300;

/// A probability strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(domain(format!("probability {value} outside (0, 1)")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }

    /// Upper quantile level of a symmetric two-sided content `beta`,
    /// i.e. `1 - (1 - beta) / 2`.
    pub fn two_sided_upper(self) -> Self {
        Self(1.0 - (1.0 - self.0) / 2.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Degrees of freedom, at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreesOfFreedom(u64);

impl DegreesOfFreedom {
    pub fn new(value: u64) -> Result<Self> {
        if value >= 1 {
            Ok(Self(value))
        } else {
            Err(domain("degrees of freedom must be at least 1"))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma function `Q(a, x) = 1 - P(a, x)`.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..SPECIAL_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * SPECIAL_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..SPECIAL_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < SPECIAL_EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    incomplete_beta(a, b, x, 1.0 - x)
}

/// `I_x(a, b)` with `y = 1 - x` supplied separately so callers that know the
/// complement exactly do not lose it to cancellation.
fn incomplete_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, y) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..SPECIAL_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < SPECIAL_EPS {
            break;
        }
    }
    h
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, via `erfc(z) = Q(1/2, z^2)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let tail = 0.5 * regularized_gamma_q(0.5, 0.5 * x * x);
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Standard normal quantile `Z_p`.
pub fn std_normal_quantile(p: Probability) -> f64 {
    let p = p.value();
    if p == 0.5 {
        return 0.0;
    }
    // Solve in the lower tail, where the CDF has full relative precision.
    let (target, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    let lower = invert_cdf(target, std_normal_cdf, std_normal_pdf, -40.0, 0.0, -1.0)
        .expect("normal quantile solve failed to converge");
    sign * -lower
}

pub fn student_t_pdf(t: f64, df: DegreesOfFreedom) -> f64 {
    let nu = df.as_f64();
    let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
    (ln_norm - 0.5 * (nu + 1.0) * (t * t / nu).ln_1p()).exp()
}

/// Student t CDF with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: DegreesOfFreedom) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t == 0.0 {
        return 0.5;
    }
    let nu = df.as_f64();
    let t2 = t * t;
    let x = nu / (nu + t2);
    let y = t2 / (nu + t2);
    let tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x, y);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Student t quantile `t_{p, df}`.
pub fn student_t_quantile(p: Probability, df: DegreesOfFreedom) -> f64 {
    let pv = p.value();
    if pv == 0.5 {
        return 0.0;
    }
    let (target, sign) = if pv > 0.5 { (1.0 - pv, 1.0) } else { (pv, -1.0) };
    let cdf = |t: f64| student_t_cdf(t, df);
    let pdf = |t: f64| student_t_pdf(t, df);
    let mut lo = -1.0;
    while cdf(lo) > target {
        lo *= 2.0;
    }
    let guess = std_normal_quantile(Probability(target)).max(lo);
    let lower = invert_cdf(target, cdf, pdf, lo, 0.0, guess)
        .expect("student t quantile solve failed to converge");
    sign * -lower
}

pub fn chi_square_pdf(x: f64, df: DegreesOfFreedom) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = 0.5 * df.as_f64();
    ((k - 1.0) * x.ln() - 0.5 * x - k * 2f64.ln() - ln_gamma(k)).exp()
}

pub fn chi_square_cdf(x: f64, df: DegreesOfFreedom) -> f64 {
    regularized_gamma_p(0.5 * df.as_f64(), 0.5 * x)
}

/// Chi-square quantile `chi2_{p, df}` (the value with lower-tail mass `p`).
pub fn chi_square_quantile(p: Probability, df: DegreesOfFreedom) -> f64 {
    let pv = p.value();
    let k = df.as_f64();
    let cdf = |x: f64| chi_square_cdf(x, df);
    let pdf = |x: f64| chi_square_pdf(x, df);
    let mut hi = k.max(1.0);
    while cdf(hi) < pv {
        hi *= 2.0;
    }
    // Wilson-Hilferty starting point.
    let z = std_normal_quantile(p);
    let h = 2.0 / (9.0 * k);
    let guess = (k * (1.0 - h + z * h.sqrt()).powi(3)).clamp(0.0, hi);
    invert_cdf(pv, cdf, pdf, 0.0, hi, guess).expect("chi-square quantile solve failed to converge")
}

/// Solves `cdf(x) = p` for a nondecreasing `cdf` with `cdf(lo) <= p <= cdf(hi)`.
fn invert_cdf(
    p: f64,
    cdf: impl Fn(f64) -> f64,
    pdf: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
) -> Result<f64> {
    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    let mut last_step = hi - lo;
    for _ in 0..QUANTILE_MAX_ITER {
        let f = cdf(x) - p;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = pdf(x);
        let mut next = x - f / slope;
        // Bisect when Newton leaves the bracket or stops halving its step,
        // which happens deep in a tail where the CDF is nearly flat.
        if !next.is_finite() || next <= lo || next >= hi || 2.0 * (next - x).abs() > last_step.abs() {
            next = 0.5 * (lo + hi);
        }
        last_step = next - x;
        if (next - x).abs() < QUANTILE_TOLERANCE || hi - lo < QUANTILE_TOLERANCE {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Convergence {
        iterations: QUANTILE_MAX_ITER,
        target: p,
    })
}
