//! Ordinary least squares baseline with classical prediction intervals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::intervals::Interval;
use crate::stat_dist::{student_t_quantile, DegreesOfFreedom, Probability};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsModel {
    /// Intercept first.
    pub coefficients: Vec<f64>,
    /// `(X^T X)^{-1}` for the design with intercept, row-major.
    xtx_inv: Vec<f64>,
    /// Residual sum of squares over N.
    pub sigma2: f64,
    pub n: usize,
    /// Number of regressors plus one.
    pub p: usize,
}

pub fn fit_ols(d: &Dataset) -> Result<OlsModel> {
    let n = d.len();
    let p = d.n_features() + 1;
    if n <= p {
        return Err(Error::Singular(format!("{n} rows for {p} coefficients")));
    }
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { d.row(i)[j - 1] });
    let y = DVector::from_column_slice(d.response());
    let xtx = x.transpose() * &x;
    let chol = xtx
        .clone()
        .cholesky()
        .filter(|c| {
            let l = c.l_dirty();
            (0..p).all(|j| l[(j, j)] * l[(j, j)] > 1e-10 * xtx[(j, j)])
        })
        .ok_or_else(|| Error::Singular("X^T X is not positive definite".into()))?;
    let beta = chol.solve(&(x.transpose() * &y));
    let resid = &y - &x * &beta;
    let inv = chol.inverse();
    Ok(OlsModel {
        coefficients: beta.as_slice().to_vec(),
        xtx_inv: inv.transpose().as_slice().to_vec(),
        sigma2: resid.norm_squared() / n as f64,
        n,
        p,
    })
}

impl OlsModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.coefficients[0]
            + self.coefficients[1..]
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    /// `x*^T (X^T X)^{-1} x*` with `x* = (1, x)`.
    pub fn leverage(&self, x: &[f64]) -> f64 {
        let p = self.p;
        let xs: Vec<f64> = std::iter::once(1.0).chain(x.iter().copied()).collect();
        let mut acc = 0.0;
        for r in 0..p {
            let row = &self.xtx_inv[r * p..(r + 1) * p];
            acc += xs[r] * row.iter().zip(&xs).map(|(a, b)| a * b).sum::<f64>();
        }
        acc
    }
}

/// `fhat(x) +/- c t_{1-(1-beta)/2, N-p}` with
/// `c = sqrt(N sigma^2 / (N - p) * (1 + x*^T (X^T X)^{-1} x*))`.
pub fn ols_prediction_interval(ols: &OlsModel, x: &[f64], beta: Probability) -> Result<Interval> {
    if x.len() + 1 != ols.p {
        return Err(Error::LengthMismatch {
            expected: ols.p - 1,
            actual: x.len(),
        });
    }
    let df = DegreesOfFreedom::new((ols.n - ols.p) as u64)?;
    let nf = ols.n as f64;
    let c = (nf * ols.sigma2 / (nf - ols.p as f64) * (1.0 + ols.leverage(x))).sqrt();
    let t = student_t_quantile(beta.two_sided_upper(), df);
    Interval::centered(ols.predict(x), c * t)
}
