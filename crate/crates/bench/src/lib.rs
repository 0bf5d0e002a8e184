//! Shared fixtures for the benchmarks.

use bopi_core::llr::{cv_prediction_errors, CvScheme, Dataset, LoessModel};
use bopi_core::simlab::{friedman1, DgpSpec, Family};
use bopi_core::ErrorSet;

/// Standardized Friedman #1 sample of size `n`.
pub fn friedman(n: usize, seed: u64) -> Dataset {
    friedman1(&DgpSpec::new(Family::Friedman1, n, seed)).expect("valid spec")
}

/// Ten-fold errors of a loess fit with bandwidth `k`.
pub fn errors(d: &Dataset, k: usize) -> ErrorSet {
    let m = LoessModel::new(d, k).expect("bandwidth in range");
    cv_prediction_errors(&m, CvScheme::KFold(10), 1).expect("cv succeeds")
}
