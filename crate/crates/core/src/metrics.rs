//! Interval quality measures: coverage, mean interval size, the equivalent
//! Gaussian standard deviation (EGSD), the reliability threshold and the
//! paired t-test used to compare interval sizes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::intervals::{two_sided_z, IntervalBand};
use crate::stat_dist::{std_normal_quantile, student_t_cdf, DegreesOfFreedom, Probability};

/// Fraction of `y` inside the matching intervals (boundaries count as
/// inside).
pub fn coverage(band: &IntervalBand, y: &[f64]) -> Result<f64> {
    if band.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: band.len(),
            actual: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Empty("interval band".into()));
    }
    let inside = band.iter().zip(y).filter(|(iv, &v)| iv.contains(v)).count();
    Ok(inside as f64 / y.len() as f64)
}

/// Mean interval size and its `n - 1` standard deviation (zero for a single
/// interval).
pub fn mis(band: &IntervalBand) -> Result<(f64, f64)> {
    mean_sd(&band.sizes())
}

fn mean_sd(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("interval band".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// Standard deviation of the centered Gaussian whose symmetric interval of
/// probability `cover` has size `mis`: `mis / (2 Z_{1-(1-cover)/2})`.
pub fn egsd(mis: f64, cover: f64) -> Result<f64> {
    let p = Probability::new(cover)
        .map_err(|_| domain(format!("EGSD needs coverage strictly inside (0, 1), got {cover}")))?;
    if !(mis >= 0.0) {
        return Err(domain(format!("interval size {mis} must be nonnegative")));
    }
    Ok(mis / (2.0 * two_sided_z(p)))
}

/// Divides every value by the largest one.
pub fn normalize_egsd(values: &[f64]) -> Result<Vec<f64>> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || !(max > 0.0) {
        return Err(domain("normalization needs a positive maximum"));
    }
    Ok(values.iter().map(|v| v / max).collect())
}

/// Lowest coverage on `n` test points that is not significantly below
/// `beta` at one-sided level `alpha`:
/// `beta - Z_{1-alpha} sqrt(beta (1 - beta) / n)`.
pub fn wilson_critical(beta: Probability, n: usize, alpha: Probability) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("test set".into()));
    }
    let b = beta.value();
    let z = std_normal_quantile(alpha.complement());
    Ok(b - z * (b * (1.0 - b) / n as f64).sqrt())
}

/// One-sided level of the reliability threshold.
pub const RELIABILITY_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Significance {
    #[default]
    None,
    /// p < 0.05
    One,
    /// p < 0.01
    Two,
    /// p < 0.001
    Three,
}

impl Significance {
    pub fn from_p(p: f64) -> Self {
        if p < 0.001 {
            Significance::Three
        } else if p < 0.01 {
            Significance::Two
        } else if p < 0.05 {
            Significance::One
        } else {
            Significance::None
        }
    }

    pub fn stars(self) -> &'static str {
        match self {
            Significance::None => "",
            Significance::One => "*",
            Significance::Two => "**",
            Significance::Three => "***",
        }
    }
}

impl fmt::Display for Significance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.stars())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub t: f64,
    /// Two-sided.
    pub p_value: f64,
    pub df: u64,
    pub significance: Significance,
}

/// Two-sided paired t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(domain("paired t-test needs at least two pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean, sd) = mean_sd(&diffs)?;
    let n = diffs.len();
    let df = DegreesOfFreedom::new(n as u64 - 1)?;
    let (t, p_value) = if sd == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (sd / (n as f64).sqrt());
        (t, 2.0 * student_t_cdf(-t.abs(), df))
    };
    Ok(PairedTTest {
        t,
        p_value,
        df: df.get(),
        significance: Significance::from_p(p_value),
    })
}

/// One method's intervals on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub method: String,
    pub beta: f64,
    pub n: usize,
    pub coverage: f64,
    pub mis: f64,
    pub sigma_is: f64,
    pub wilson_critical: f64,
    pub reliable: bool,
    pub egsd: Option<f64>,
    pub egsd_normalized: Option<f64>,
    /// Set on the reliable method with the smallest MIS when its sizes
    /// differ significantly from the runner-up's.
    pub stars: Significance,
}

impl EvaluationReport {
    pub fn new(
        dataset: &str,
        method: &str,
        beta: Probability,
        band: &IntervalBand,
        y: &[f64],
    ) -> Result<Self> {
        let cov = coverage(band, y)?;
        let (m, s) = mis(band)?;
        let critical = wilson_critical(beta, y.len(), Probability::new(RELIABILITY_ALPHA)?)?;
        Ok(Self {
            dataset: dataset.to_string(),
            method: method.to_string(),
            beta: beta.value(),
            n: y.len(),
            coverage: cov,
            mis: m,
            sigma_is: s,
            wilson_critical: critical,
            reliable: cov >= critical,
            egsd: egsd(m, cov).ok(),
            egsd_normalized: None,
            stars: Significance::None,
        })
    }
}

/// Fills the normalized EGSD and the significance stars of reports that
/// share one dataset and content. `sizes[i]` holds the per-point interval
/// sizes behind `reports[i]`.
pub fn finalize_reports(reports: &mut [EvaluationReport], sizes: &[Vec<f64>]) -> Result<()> {
    if reports.len() != sizes.len() {
        return Err(Error::LengthMismatch {
            expected: reports.len(),
            actual: sizes.len(),
        });
    }
    let max = reports
        .iter()
        .filter_map(|r| r.egsd)
        .fold(f64::NEG_INFINITY, f64::max);
    for r in reports.iter_mut() {
        r.egsd_normalized = r.egsd.filter(|_| max > 0.0).map(|e| e / max);
        r.stars = Significance::None;
    }
    let mut reliable: Vec<usize> = (0..reports.len()).filter(|&i| reports[i].reliable).collect();
    reliable.sort_by(|&a, &b| reports[a].mis.total_cmp(&reports[b].mis).then(a.cmp(&b)));
    if let [best, second, ..] = reliable[..] {
        let test = paired_t_test(&sizes[best], &sizes[second])?;
        reports[best].stars = test.significance;
    }
    Ok(())
}
