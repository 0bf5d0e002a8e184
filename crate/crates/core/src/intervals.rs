//! Closed-form normal prediction and tolerance intervals, and the analysis of
//! when a tolerance interval contains the matching prediction interval.
//!
//! Two-sided `beta`-content intervals always put `(1 - beta) / 2` of tail
//! mass on each side.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::stat_dist::{
    chi_square_quantile, std_normal_quantile, student_t_quantile, DegreesOfFreedom, Probability,
};

/// A closed interval `[lower, upper]` in response units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(domain(format!("invalid interval [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    /// Symmetric interval around `center`. `half_width` must be nonnegative.
    pub fn centered(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width >= 0.0) {
            return Err(domain(format!("negative half width {half_width}")));
        }
        Self::new(center - half_width, center + half_width)
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.upper
    }

    #[inline]
    pub fn size(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Boundary values count as contained.
    #[inline]
    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    pub fn shift(&self, by: f64) -> Self {
        Self {
            lower: self.lower + by,
            upper: self.upper + by,
        }
    }
}

/// One interval per query point, in query order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalBand(pub Vec<Interval>);

impl IntervalBand {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn sizes(&self) -> Vec<f64> {
        self.0.iter().map(Interval::size).collect()
    }
}

impl FromIterator<Interval> for IntervalBand {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Sample mean, sample standard deviation and size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl SampleSummary {
    pub fn new(mean: f64, sd: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("sample size {n} < 2")));
        }
        if !(sd >= 0.0) || !mean.is_finite() {
            return Err(domain(format!("invalid summary mean={mean} sd={sd}")));
        }
        Ok(Self { mean, sd, n })
    }

    /// Mean and `n - 1` standard deviation of `values`.
    pub fn from_sample(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(domain(format!("sample size {n} < 2")));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        Self::new(mean, (ss / (n - 1) as f64).sqrt(), n)
    }
}

fn dof(n: usize) -> Result<DegreesOfFreedom> {
    if n < 2 {
        return Err(domain(format!("sample size {n} < 2")));
    }
    DegreesOfFreedom::new(n as u64 - 1)
}

/// `Z_{1-(1-beta)/2}`.
pub fn two_sided_z(beta: Probability) -> f64 {
    std_normal_quantile(beta.two_sided_upper())
}

/// Coefficient of the sample sd in the normal prediction interval:
/// `t_{1-(1-beta)/2, n-1} * sqrt(1 + 1/n)`.
pub fn prediction_factor(n: usize, beta: Probability) -> Result<f64> {
    let df = dof(n)?;
    let n = n as f64;
    Ok(student_t_quantile(beta.two_sided_upper(), df) * (1.0 + 1.0 / n).sqrt())
}

pub fn normal_prediction_interval(s: &SampleSummary, beta: Probability) -> Result<Interval> {
    Interval::centered(s.mean, prediction_factor(s.n, beta)? * s.sd)
}

/// Howe's two-sided tolerance factor
/// `sqrt((n-1)(1+1/n) Z^2_{1-(1-beta)/2} / chi2_{1-gamma, n-1})`.
pub fn tolerance_factor(n: usize, beta: Probability, gamma: Probability) -> Result<f64> {
    let df = dof(n)?;
    let nf = n as f64;
    let z = two_sided_z(beta);
    let chi = chi_square_quantile(gamma.complement(), df);
    Ok(((nf - 1.0) * (1.0 + 1.0 / nf) * z * z / chi).sqrt())
}

pub fn normal_tolerance_interval(
    s: &SampleSummary,
    beta: Probability,
    gamma: Probability,
) -> Result<Interval> {
    Interval::centered(s.mean, tolerance_factor(s.n, beta, gamma)? * s.sd)
}

/// Size of the tolerance interval over the size of the prediction interval
/// for the same sample. At least one means the tolerance interval contains
/// the prediction interval.
pub fn tolerance_prediction_ratio(n: usize, beta: Probability, gamma: Probability) -> Result<f64> {
    let df = dof(n)?;
    let upper = beta.two_sided_upper();
    let z = std_normal_quantile(upper);
    let t = student_t_quantile(upper, df);
    let chi = chi_square_quantile(gamma.complement(), df);
    Ok(z * ((n - 1) as f64).sqrt() / (t * chi.sqrt()))
}

/// Smallest `n` in the ascending `grid` whose tolerance interval contains the
/// prediction interval, if any.
pub fn min_n_for_containment(
    beta: Probability,
    gamma: Probability,
    grid: &[usize],
) -> Result<Option<usize>> {
    for &n in grid {
        if tolerance_prediction_ratio(n, beta, gamma)? >= 1.0 {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Constant-width interval `fhat +/- Z_{1-(1-beta)/2} * rmse`.
pub fn conventional_interval(fhat: f64, rmse: f64, beta: Probability) -> Result<Interval> {
    if !(rmse >= 0.0) {
        return Err(domain(format!("rmse {rmse} must be nonnegative")));
    }
    Interval::centered(fhat, two_sided_z(beta) * rmse)
}

/// Exploratory sample-size grid: 20 to 10000 in steps of 5.
pub fn default_containment_grid() -> Vec<usize> {
    (20..=10_000).step_by(5).collect()
}

/// Published table of the smallest sample size for which the
/// `gamma`-coverage `beta`-content tolerance interval contains the
/// `beta`-prediction interval.
pub mod containment_table {
    /// Confidence levels (rows).
    pub const GAMMAS: [f64; 4] = [0.55, 0.6, 0.65, 0.7];
    /// Contents (columns).
    pub const BETAS: [f64; 4] = [0.8, 0.9, 0.95, 0.99];
    /// Sample sizes; `None` stands for "at most 20".
    pub const MIN_N: [[Option<usize>; 4]; 4] = [
        [Some(20), Some(50), Some(100), Some(350)],
        [None, Some(20), Some(50), Some(80)],
        [None, None, Some(20), Some(40)],
        [None, None, None, Some(20)],
    ];
    /// Every sample size printed in the table, plus 20.
    pub const GRID: [usize; 6] = [20, 40, 50, 80, 100, 350];

    /// Tabulated required sample size, with "at most 20" cells read as 20.
    pub fn required_n(row: usize, col: usize) -> usize {
        MIN_N[row][col].unwrap_or(20)
    }
}
