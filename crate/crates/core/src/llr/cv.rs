//! Cross-validated prediction errors and bandwidth selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::loess::LoessModel;
use crate::error::{Error, Result};

/// Number of folds used when nothing else is requested.
pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvScheme {
    LeaveOneOut,
    KFold(usize),
}

impl Default for CvScheme {
    fn default() -> Self {
        CvScheme::KFold(DEFAULT_FOLDS)
    }
}

/// Out-of-sample prediction errors `y_i - fhat^{-i}(x_i)` for every training
/// row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSet {
    errors: Vec<f64>,
    predictions: Vec<f64>,
    /// Scheme actually used (the fold count may have been reduced).
    scheme: CvScheme,
    /// Fold of each row; under leave-one-out every row is its own fold.
    folds: Vec<usize>,
}

impl ErrorSet {
    /// Builds an error set directly from errors, with every row in its own
    /// fold. Useful when the errors come from elsewhere.
    pub fn from_errors(errors: Vec<f64>) -> Self {
        let n = errors.len();
        Self {
            predictions: vec![f64::NAN; n],
            errors,
            scheme: CvScheme::LeaveOneOut,
            folds: (0..n).collect(),
        }
    }

    #[inline]
    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    /// Out-of-sample predictions `fhat^{-i}(x_i)`.
    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }

    pub fn scheme(&self) -> CvScheme {
        self.scheme
    }

    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn rmse(&self) -> f64 {
        (self.errors.iter().map(|e| e * e).sum::<f64>() / self.errors.len() as f64).sqrt()
    }

    pub fn sse(&self) -> f64 {
        self.errors.iter().map(|e| e * e).sum()
    }
}

/// Seeded fold labels: a shuffled permutation dealt round-robin into `k`
/// folds.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k;
    }
    folds
}

/// Cross-validated prediction errors of `m` on its own training data.
///
/// Sub-models keep `m`'s neighborhood size when the training part is large
/// enough. Otherwise the fold count is reduced (never below two) and, as a
/// last resort, the neighborhood is clamped to the training-part size.
pub fn cv_prediction_errors(m: &LoessModel<'_>, scheme: CvScheme, seed: u64) -> Result<ErrorSet> {
    let d = m.data();
    let n = d.len();
    let min_k = LoessModel::min_k(d);
    if n < 2 * min_k {
        return Err(Error::Data(format!(
            "cross-validation needs at least {} rows, have {n}",
            2 * min_k
        )));
    }
    match scheme {
        CvScheme::LeaveOneOut => {
            let k = m.k().min(n - 1);
            let predictions = (0..n)
                .into_par_iter()
                .map(|i| m.fit_local_without(i, k).map(|f| f.prediction()))
                .collect::<Result<Vec<f64>>>()?;
            Ok(assemble(d, predictions, scheme, (0..n).collect()))
        }
        CvScheme::KFold(requested) => {
            if requested < 2 {
                return Err(Error::Config(format!("k-fold needs k >= 2, got {requested}")));
            }
            let mut k = requested.min(n);
            // Largest fold is ceil(n / k); shrink k until the smallest
            // training part holds a full neighborhood.
            while k > 2 && n - n.div_ceil(k) < m.k() {
                k -= 1;
            }
            if k != requested {
                log::warn!("reduced cross-validation from {requested} to {k} folds");
            }
            let folds = fold_assignment(n, k, seed);
            let mut predictions = vec![0.0; n];
            for fold in 0..k {
                let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| folds[i] == fold);
                let sub = d.subset(&train);
                let sub_k = m.k().min(sub.len());
                let model = m.refit(&sub, sub_k)?;
                let preds = test
                    .par_iter()
                    .map(|&i| model.predict(d.row(i)))
                    .collect::<Result<Vec<f64>>>()?;
                for (&i, p) in test.iter().zip(preds) {
                    predictions[i] = p;
                }
            }
            Ok(assemble(d, predictions, CvScheme::KFold(k), folds))
        }
    }
}

fn assemble(d: &Dataset, predictions: Vec<f64>, scheme: CvScheme, folds: Vec<usize>) -> ErrorSet {
    let errors = d
        .response()
        .iter()
        .zip(&predictions)
        .map(|(y, p)| y - p)
        .collect();
    ErrorSet {
        errors,
        predictions,
        scheme,
        folds,
    }
}

/// Cross-validation score `sum_i (y_i - fhat^{-i}(x_i))^2` for one
/// neighborhood size.
pub fn cv_score(d: &Dataset, k: usize, scheme: CvScheme, seed: u64) -> Result<f64> {
    let m = LoessModel::new(d, k)?;
    Ok(cv_prediction_errors(&m, scheme, seed)?.sse())
}

/// Grid value of K minimizing the cross-validated squared error; ties go to
/// the smallest K.
pub fn select_bandwidth(d: &Dataset, k_grid: &[usize], scheme: CvScheme, seed: u64) -> Result<usize> {
    let mut grid = k_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::Empty("bandwidth grid".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for k in grid {
        let score = cv_score(d, k, scheme, seed)?;
        log::debug!("bandwidth K={k}: cv sse {score}");
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((k, score));
        }
    }
    Ok(best.expect("grid is nonempty").0)
}
